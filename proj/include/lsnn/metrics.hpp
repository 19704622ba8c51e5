#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lsnn/loss.hpp"
#include "lsnn/network.hpp"
#include "lsnn/problem.hpp"

namespace lsnn {

/// Relative errors of a trained network against the exact solution, matching
/// the benchmark-table columns.
struct ErrorMetrics {
    double rel_l2 = 0.0;     // ||u - v||_0 / ||u||_0
    double rel_vbeta = 0.0;  // graph-norm version with the FD directional derivative
    double loss_ratio = 0.0; // sqrt(L_T(v; f) / L_T(v; 0))
    long effective_params = 0;
    long raw_params = 0;
};

/// Asserts that no cell centroid sits on a set where exact_u_beta is undefined.
/// Problems whose interfaces are streamlines with consistent side conventions
/// carry no clearance function and pass trivially.
inline void check_interface_clearance(const BenchmarkProblem& problem,
                                      const IntegrationMesh& mesh) {
    if (!problem.interface_clearance) return;
    const auto& dist = *problem.interface_clearance;
    for (std::size_t k = 0; k < mesh.cells.size(); ++k)
        if (!(dist(mesh.cells[k].centroid) > 1e-9))
            throw ConfigError("check_interface_clearance: centroid of cell " + std::to_string(k) +
                              " lies on the exact-solution interface");
}

/// Error norms by centroid quadrature on `eval_mesh`. The network's directional
/// derivative uses the same backward quotient (and rho) as training; the exact
/// solution's uses the analytic exact_u_beta.
inline ErrorMetrics error_metrics(const Parameters& params, const BenchmarkProblem& problem,
                                  const IntegrationMesh& eval_mesh, const LossConfig& cfg) {
    check_interface_clearance(problem, eval_mesh);
    EvalWorkspace ws(params.arch);

    double num_l2 = 0.0, den_l2 = 0.0, num_d = 0.0, den_d = 0.0;
    for (const Cell& c : eval_mesh.cells) {
        const Vec2 x = c.centroid;
        const double u = problem.exact_u(x);
        const double ub = problem.exact_u_beta(x);
        const Vec2 b = problem.beta(x);
        const double m = norm(b);
        const double scale = cfg.scale_fd_by_beta_norm ? m : 1.0;
        const double v = forward(params, x, ws);
        const double vback = forward(params, x - (cfg.rho / m) * b, ws);
        const double vb = scale * (v - vback) / cfg.rho;

        num_l2 += (u - v) * (u - v) * c.measure;
        den_l2 += u * u * c.measure;
        num_d += (ub - vb) * (ub - vb) * c.measure;
        den_d += ub * ub * c.measure;
    }
    if (!(den_l2 > 0.0))
        throw ConfigError("error_metrics: exact solution has zero L2 norm on the mesh");

    ErrorMetrics out;
    out.rel_l2 = std::sqrt(num_l2 / den_l2);
    out.rel_vbeta = std::sqrt((num_l2 + num_d) / (den_l2 + den_d));
    out.effective_params = effective_param_count(params.arch);
    out.raw_params = raw_param_count(params.arch);

    LossEvaluator eval(eval_mesh, problem, cfg, /*require_rho_below_h=*/false);
    const double with_data = eval.evaluate(params).total;
    const double zero_data = eval.evaluate_zero_data(params).total;
    if (!(zero_data > 0.0))
        throw ConfigError("error_metrics: homogeneous functional vanished; ratio undefined");
    out.loss_ratio = std::sqrt(with_data / zero_data);
    return out;
}

struct SectionSample {
    double t;
    double exact;
    double approx;
};

/// Exact and network values sampled uniformly along a section line.
/// Discontinuities of the exact solution are sampled one-sided: whatever side
/// convention exact_u carries at the sample point is reported, never an average.
inline std::vector<SectionSample> cross_section(const Parameters& params,
                                                const BenchmarkProblem& problem,
                                                const SectionLine& line, int samples) {
    if (samples < 2) throw ConfigError("cross_section: need at least 2 samples");
    EvalWorkspace ws(params.arch);
    std::vector<SectionSample> out;
    out.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / (samples - 1);
        const Vec2 p = line.a + s * (line.b - line.a);
        out.push_back({line.t0 + s * (line.t1 - line.t0), problem.exact_u(p),
                       forward(params, p, ws)});
    }
    return out;
}

/// Total overshoot of the approximation beyond the exact range:
///   max(0, max(approx) - max(exact)) + max(0, min(exact) - min(approx)).
inline double overshoot_measure(const std::vector<SectionSample>& section) {
    if (section.empty()) return 0.0;
    double emax = section[0].exact, emin = section[0].exact;
    double amax = section[0].approx, amin = section[0].approx;
    for (const SectionSample& s : section) {
        emax = std::max(emax, s.exact);
        emin = std::min(emin, s.exact);
        amax = std::max(amax, s.approx);
        amin = std::min(amin, s.approx);
    }
    return std::max(0.0, amax - emax) + std::max(0.0, emin - amin);
}

}  // namespace lsnn
