#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lsnn/benchmarks.hpp"
#include "lsnn/metrics.hpp"
#include "lsnn/trainer.hpp"

namespace lsnn {

/// Exact solution of the advection problem for the n-chord sector field with
/// inflow data jumping at (a, 0): -1 inside the polygon whose edges are the
/// chords of the radius-a circle between the sector rays, +1 outside. Within
/// sector i the chord line is xi_i . x = a with
///   xi_i = (cos t_mid, sin t_mid) / cos(pi/(4n)),  t_mid = (i + 1/2) pi/(2n),
/// which reduces to the two-sector formulas (1, sqrt2-1), (sqrt2-1, 1) at n = 2.
inline std::function<double(Vec2)> sector_exact_solution(int n, double a) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("sector_exact_solution: need 0 < a < 1");
    const VelocityField field = VelocityField::sectors(n);
    const double half = std::numbers::pi / (4.0 * n);
    return [field, a, half, n](Vec2 p) {
        const int i = field.sector_index(p);
        const double tm = (2 * i + 1) * half;
        const double s = (std::cos(tm) * p.x + std::sin(tm) * p.y) / std::cos(half);
        return s < a ? -1.0 : 1.0;
    };
}

/// Stage problem of the continuation family: the rotational benchmark's data
/// with the velocity field replaced by its n-chord approximation.
inline BenchmarkProblem sector_problem(int n, double a = kSectorJumpRadius) {
    Domain dom(0.0, 1.0, 0.0, 1.0);
    auto u = sector_exact_solution(n, a);
    BenchmarkProblem prob{"sectors:" + std::to_string(n),
                          dom,
                          VelocityField::sectors(n),
                          constant_reaction(0.0),
                          detail::zero_fn,
                          u,
                          u,
                          detail::zero_fn};
    const double half = std::numbers::pi / (4.0 * n);
    prob.interface_clearance = [n, a, half](Vec2 p) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double tm = (2 * i + 1) * half;
            best = std::min(best, std::abs(std::cos(tm) * p.x + std::sin(tm) * p.y -
                                           a * std::cos(half)));
        }
        return best;
    };
    prob.default_section = parse_section("x=0", dom);
    return prob;
}

struct ContinuationStage {
    VelocityField field;  // sectors(n) or rotational
    Architecture arch;
    long iterations;
    Schedule schedule;
};

struct ContinuationPlan {
    std::vector<ContinuationStage> stages;

    /// Checks the growth constraints; the last stage must train on the curved
    /// field unless allow_partial (tests exercising stage mechanics).
    void validate(bool allow_partial = false) const {
        if (stages.empty()) throw ConfigError("ContinuationPlan: no stages");
        for (std::size_t k = 0; k < stages.size(); ++k) {
            if (k == 0) continue;
            const auto& prev = stages[k - 1].arch.widths;
            const auto& cur = stages[k].arch.widths;
            if (prev.size() != cur.size())
                throw ShapeError("ContinuationPlan: stage depth must stay constant");
            for (std::size_t l = 0; l < cur.size(); ++l)
                if (cur[l] < prev[l])
                    throw ShapeError("ContinuationPlan: widths must be nondecreasing");
        }
        if (!allow_partial && stages.back().field.kind() != VelocityField::Kind::rotational)
            throw ConfigError("ContinuationPlan: final stage must use the curved field");
    }
};

/// The default plan: one stage per n = 2, 3, 4, 5 then the curved field, with
/// rates following a 20% decay across the 50000-iteration stages.
inline ContinuationPlan default_continuation_plan() {
    ContinuationPlan plan;
    plan.stages = {
        {VelocityField::sectors(2), Architecture::parse("2-5-5-1"), 50000,
         Schedule::fixed(0.003)},
        {VelocityField::sectors(3), Architecture::parse("2-6-6-1"), 50000,
         Schedule::fixed(0.01)},
        {VelocityField::sectors(4), Architecture::parse("2-6-6-1"), 50000,
         Schedule::fixed(0.008)},
        {VelocityField::sectors(5), Architecture::parse("2-8-8-1"), 50000,
         Schedule::fixed(0.0064)},
        {VelocityField::rotational(), Architecture::parse("2-25-25-1"), 50000,
         Schedule::fixed(0.00512)},
    };
    return plan;
}

/// Embeds a trained network into a wider architecture of the same depth:
/// existing weights land in the top-left blocks, connections from new neurons
/// into old ones are zero (so the old network's hidden units compute exactly
/// what they did), new neurons draw from the initializer's distribution, and
/// the output layer is refitted by the frozen-basis solve.
inline Parameters grow_and_transplant(const Parameters& small, const Architecture& big_arch,
                                      std::uint64_t seed, const IntegrationMesh& mesh,
                                      const BenchmarkProblem& problem, InitOptions opts = {}) {
    const Architecture& sa = small.arch;
    if (sa.widths.size() != big_arch.widths.size())
        throw ShapeError("grow_and_transplant: depth mismatch");
    for (std::size_t l = 0; l < sa.widths.size(); ++l)
        if (big_arch.widths[l] < sa.widths[l])
            throw ShapeError("grow_and_transplant: target width shrinks layer " +
                             std::to_string(l));

    Parameters big(big_arch);
    Rng rng(seed);
    const int L = big_arch.depth();
    for (int l = 1; l < L; ++l) {
        const int old_out = sa.widths[l], old_in = sa.widths[l - 1];
        const int new_out = big_arch.widths[l], new_in = big_arch.widths[l - 1];
        for (int i = 0; i < old_out; ++i) {
            for (int j = 0; j < old_in; ++j) big.weight(l, i, j) = small.weight(l, i, j);
            // columns old_in..new_in-1 stay zero: old neurons ignore new inputs
            big.bias(l, i) = small.bias(l, i);
        }
        const double s = std::sqrt(1.0 / new_in);
        for (int i = old_out; i < new_out; ++i) {
            for (int j = 0; j < new_in; ++j) big.weight(l, i, j) = rng.uniform(-s, s);
            big.bias(l, i) = rng.uniform(-s, s);
        }
    }
    if (opts.random_output) {
        const double s = std::sqrt(1.0 / big_arch.widths[L - 1]);
        for (int j = 0; j < big_arch.widths[L - 1]; ++j)
            big.weight(L, 0, j) = rng.uniform(-s, s);
        big.bias(L, 0) = rng.uniform(-s, s);
    } else {
        solve_output_layer(big, mesh, problem);
    }
    return big;
}

struct ContinuationConfig {
    double h = 0.01;
    double boundary_weight = 1.0;
    double rho_fraction_piecewise = 0.5;  // sector stages
    double rho_fraction_curved = 0.1;     // rotational stage
    bool scale_fd_by_beta_norm = true;
    double jump_radius = kSectorJumpRadius;
    TrainOptions train{};
};

struct StageResult {
    std::string field;
    std::string arch;
    long iterations = 0;
    TrainingReport report;
    ErrorMetrics vs_stage;   // against the stage's own exact solution
    ErrorMetrics vs_target;  // against the curved-field solution
};

/// Runs the stages in order: stage 0 is initialized from scratch, every later
/// stage grows the previous stage's trained parameters. Metrics are reported
/// against both the stage solution u_n and the curved-field solution u. An
/// aborted stage ends the run with the partial results returned.
inline std::vector<StageResult> run_continuation(const ContinuationPlan& plan,
                                                 const ContinuationConfig& cfg,
                                                 std::uint64_t seed,
                                                 bool allow_partial = false) {
    plan.validate(allow_partial);
    const BenchmarkProblem target = builtin_problem("rotational");
    const IntegrationMesh target_mesh =
        build_inflow_partition(build_uniform_mesh(target.domain, cfg.h), target.beta);
    const LossConfig target_cfg{cfg.rho_fraction_curved * cfg.h, cfg.boundary_weight,
                                cfg.scale_fd_by_beta_norm};

    std::vector<StageResult> results;
    Parameters carried;
    for (std::size_t k = 0; k < plan.stages.size(); ++k) {
        const ContinuationStage& stage = plan.stages[k];
        const bool curved = stage.field.kind() == VelocityField::Kind::rotational;
        const BenchmarkProblem problem =
            curved ? target : sector_problem(stage.field.sector_count(), cfg.jump_radius);
        const IntegrationMesh mesh =
            build_inflow_partition(build_uniform_mesh(problem.domain, cfg.h), problem.beta);
        const LossConfig lcfg{
            (curved ? cfg.rho_fraction_curved : cfg.rho_fraction_piecewise) * cfg.h,
            cfg.boundary_weight, cfg.scale_fd_by_beta_norm};

        const std::uint64_t stage_seed = seed + static_cast<std::uint64_t>(k);
        Parameters start =
            k == 0 ? initialize_network(stage.arch, problem.domain, mesh, problem, stage_seed,
                                        cfg.train.init)
                   : grow_and_transplant(carried, stage.arch, stage_seed, mesh, problem,
                                         cfg.train.init);
        StageResult res;
        res.field = stage.field.name();
        res.arch = stage.arch.to_string();
        res.iterations = stage.iterations;
        res.report = train_from(problem, mesh, std::move(start), lcfg, stage.schedule,
                                stage.iterations, stage_seed, cfg.train);
        if (!res.report.aborted) {
            res.vs_stage = error_metrics(res.report.params, problem, mesh, lcfg);
            res.vs_target = error_metrics(res.report.params, target, target_mesh, target_cfg);
        }
        const bool aborted = res.report.aborted;
        carried = res.report.params;
        results.push_back(std::move(res));
        if (aborted) break;
    }
    return results;
}

}  // namespace lsnn
