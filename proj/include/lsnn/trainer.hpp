#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lsnn/initializer.hpp"
#include "lsnn/loss.hpp"

namespace lsnn {

/// Learning-rate schedules used by the experiments:
///   fixed:<lr>                   constant
///   step:<lr0>,<delta>,<every>   lr0 - delta * floor(t / every)
///   half:<lr0>,<every>           lr0 * 0.5^floor(t / every)
///   decay:<lr0>,<frac>,<every>   lr0 * (1 - frac)^floor(t / every)
struct Schedule {
    enum class Kind { fixed, step_decrease, halving, percent_decay };
    Kind kind = Kind::fixed;
    double lr0 = 0.0;
    double delta = 0.0;     // step_decrease
    double fraction = 0.0;  // percent_decay
    long every = 0;

    static Schedule fixed(double lr) { return make(Kind::fixed, lr, 0, 0, 0); }
    static Schedule step_decrease(double lr0, double delta, long every) {
        return make(Kind::step_decrease, lr0, delta, 0, every);
    }
    static Schedule halving(double lr0, long every) {
        return make(Kind::halving, lr0, 0, 0, every);
    }
    static Schedule percent_decay(double lr0, double fraction, long every) {
        return make(Kind::percent_decay, lr0, 0, fraction, every);
    }

    double rate(long t) const {
        switch (kind) {
            case Kind::fixed:
                return lr0;
            case Kind::step_decrease:
                return lr0 - delta * static_cast<double>(t / every);
            case Kind::halving:
                return lr0 * std::pow(0.5, static_cast<double>(t / every));
            case Kind::percent_decay:
                return lr0 * std::pow(1.0 - fraction, static_cast<double>(t / every));
        }
        return lr0;
    }

    /// step_decrease can cross zero; reject budgets where it would.
    void check_positive_through(long iterations) const {
        if (iterations > 0 && !(rate(iterations - 1) > 0.0))
            throw ConfigError("Schedule: learning rate reaches zero before iteration " +
                              std::to_string(iterations));
    }

    static Schedule parse(const std::string& s) {
        auto nums = [&](std::size_t pos) {
            std::vector<double> v;
            std::string rest = s.substr(pos);
            for (auto& ch : rest)
                if (ch == ',') ch = ' ';
            std::istringstream is(rest);
            double q;
            while (is >> q) v.push_back(q);
            return v;
        };
        if (s.rfind("fixed:", 0) == 0) {
            const auto v = nums(6);
            if (v.size() == 1) return fixed(v[0]);
        } else if (s.rfind("step:", 0) == 0) {
            const auto v = nums(5);
            if (v.size() == 3) return step_decrease(v[0], v[1], static_cast<long>(v[2]));
        } else if (s.rfind("half:", 0) == 0) {
            const auto v = nums(5);
            if (v.size() == 2) return halving(v[0], static_cast<long>(v[1]));
        } else if (s.rfind("decay:", 0) == 0) {
            const auto v = nums(6);
            if (v.size() == 3) return percent_decay(v[0], v[1], static_cast<long>(v[2]));
        }
        throw ConfigError("Schedule::parse: unrecognized spec '" + s + "'");
    }

    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind) {
            case Kind::fixed: os << "fixed:" << lr0; break;
            case Kind::step_decrease: os << "step:" << lr0 << ',' << delta << ',' << every; break;
            case Kind::halving: os << "half:" << lr0 << ',' << every; break;
            case Kind::percent_decay:
                os << "decay:" << lr0 << ',' << fraction << ',' << every;
                break;
        }
        return os.str();
    }

private:
    static Schedule make(Kind k, double lr0, double delta, double fraction, long every) {
        if (!(lr0 > 0.0)) throw ConfigError("Schedule: rate must be positive");
        if (k != Kind::fixed && every <= 0) throw ConfigError("Schedule: every must be positive");
        if (k == Kind::step_decrease && !(delta > 0.0))
            throw ConfigError("Schedule: delta must be positive");
        if (k == Kind::percent_decay && !(fraction > 0.0 && fraction < 1.0))
            throw ConfigError("Schedule: fraction must lie in (0,1)");
        Schedule s;
        s.kind = k;
        s.lr0 = lr0;
        s.delta = delta;
        s.fraction = fraction;
        s.every = every;
        return s;
    }
};

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Optimizer state: parameters plus first/second moment estimates.
struct TrainState {
    Parameters params;
    std::vector<double> m, v;
    long t = 0;

    explicit TrainState(Parameters p)
        : params(std::move(p)), m(params.theta.size(), 0.0), v(params.theta.size(), 0.0) {}
};

/// One bias-corrected Adam update. NaN gradients abort with a diagnostic.
inline void adam_step(TrainState& state, std::span<const double> grad, double lr,
                      const AdamSettings& cfg = {}) {
    if (grad.size() != state.params.theta.size())
        throw ShapeError("adam_step: gradient length mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad[i];
        if (std::isnan(g))
            throw NumericError("adam_step: NaN gradient component " + std::to_string(i));
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        state.params.theta[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

struct HistoryEntry {
    long iteration;
    LossValue loss;  // at the parameters after `iteration` steps
    double lr;       // rate applied at this iteration
};

struct TrainingReport {
    Parameters params;
    LossValue final_loss;
    std::vector<HistoryEntry> history;
    std::uint64_t seed = 0;
    std::string schedule;
    long iterations = 0;  // requested
    long completed = 0;
    double wall_seconds = 0.0;
    bool aborted = false;
    std::string abort_reason;
};

struct TrainOptions {
    long record_every = 100;
    double divergence_factor = 1e6;  // abort when total exceeds this multiple of the start
    InitOptions init{};
};

/// Full-batch Adam minimization of the discrete functional starting from the
/// given parameters. Runs exactly `iterations` steps unless the loss diverges
/// or turns NaN, in which case the report comes back flagged instead of
/// throwing. Loss history is recorded every record_every steps plus at both
/// ends.
inline TrainingReport train_from(const BenchmarkProblem& problem, const IntegrationMesh& mesh,
                                 Parameters initial, const LossConfig& cfg,
                                 const Schedule& schedule, long iterations, std::uint64_t seed,
                                 const TrainOptions& opts = {}) {
    schedule.check_positive_through(iterations);
    const auto start = std::chrono::steady_clock::now();
    LossEvaluator eval(mesh, problem, cfg);

    TrainingReport report;
    report.seed = seed;
    report.schedule = schedule.to_string();
    report.iterations = iterations;

    TrainState state(std::move(initial));
    std::vector<double> grad;
    const LossValue initial_loss = eval.evaluate(state.params);
    report.history.push_back({0, initial_loss, schedule.rate(0)});
    report.final_loss = initial_loss;

    long t = 0;
    try {
        for (; t < iterations; ++t) {
            const double lr = schedule.rate(t);
            const LossValue loss = eval.evaluate_with_gradient(state.params, grad);
            if (t > 0 && t % opts.record_every == 0)
                report.history.push_back({t, loss, lr});
            if (!(loss.total <= opts.divergence_factor * std::max(initial_loss.total, 1e-30))) {
                report.aborted = true;
                report.abort_reason = "diverged at iteration " + std::to_string(t) +
                                      " (total " + std::to_string(loss.total) + ")";
                report.final_loss = loss;
                break;
            }
            adam_step(state, grad, lr);
        }
        if (!report.aborted) {
            report.final_loss = eval.evaluate(state.params);
            report.history.push_back({iterations, report.final_loss,
                                      iterations > 0 ? schedule.rate(iterations - 1)
                                                     : schedule.rate(0)});
        }
    } catch (const NumericError& err) {
        report.aborted = true;
        report.abort_reason = err.what();
    }
    report.completed = t;
    report.params = std::move(state.params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/// Initialization plus training in one call.
inline TrainingReport train(const BenchmarkProblem& problem, const IntegrationMesh& mesh,
                            const Architecture& arch, const LossConfig& cfg,
                            const Schedule& schedule, long iterations, std::uint64_t seed,
                            const TrainOptions& opts = {}) {
    Parameters params =
        initialize_network(arch, problem.domain, mesh, problem, seed, opts.init);
    return train_from(problem, mesh, std::move(params), cfg, schedule, iterations, seed, opts);
}

struct BestOfResult {
    std::vector<TrainingReport> runs;  // seeds base, base+1, ..., base+k-1
    std::size_t best = 0;              // index of the smallest final total loss
};

/// Runs k independently seeded trainings and keeps them all; `best` points at
/// the report with the smallest final total loss. Individual aborted or
/// degenerate runs are tolerated as long as one run survives.
inline BestOfResult best_of_seeds(const BenchmarkProblem& problem, const IntegrationMesh& mesh,
                                  const Architecture& arch, const LossConfig& cfg,
                                  const Schedule& schedule, long iterations,
                                  std::uint64_t base_seed, int k, const TrainOptions& opts = {}) {
    if (k < 1) throw ConfigError("best_of_seeds: need k >= 1");
    BestOfResult out;
    for (int i = 0; i < k; ++i) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        try {
            out.runs.push_back(train(problem, mesh, arch, cfg, schedule, iterations, seed, opts));
        } catch (const DegenerateBasisError& err) {
            TrainingReport failed;
            failed.seed = seed;
            failed.schedule = schedule.to_string();
            failed.iterations = iterations;
            failed.aborted = true;
            failed.abort_reason = err.what();
            out.runs.push_back(std::move(failed));
        }
    }
    bool found = false;
    for (std::size_t i = 0; i < out.runs.size(); ++i) {
        if (out.runs[i].aborted) continue;
        if (!found || out.runs[i].final_loss.total < out.runs[out.best].final_loss.total) {
            out.best = i;
            found = true;
        }
    }
    if (!found) throw NumericError("best_of_seeds: every seed aborted");
    return out;
}

}  // namespace lsnn
