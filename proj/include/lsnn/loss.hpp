#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lsnn/network.hpp"
#include "lsnn/problem.hpp"

namespace lsnn {

/// Settings for the discrete least-squares functional.
struct LossConfig {
    double rho;                         // backward FD offset, must stay below the mesh size
    double boundary_weight = 1.0;       // alpha multiplier on the inflow term
    bool scale_fd_by_beta_norm = true;  // multiply the quotient by |beta(x_K)|
};

struct LossValue {
    double interior = 0.0;
    double boundary = 0.0;  // unweighted inflow sum
    double total = 0.0;     // interior + boundary_weight * boundary
};

/// Backward finite-difference quotient along a unit direction:
///   (v(x) - v(x - rho d)) / rho.
template <class F>
double fd_directional_derivative(const F& evaluate, Vec2 x, Vec2 unit_dir, double rho) {
    return (evaluate(x) - evaluate(x - rho * unit_dir)) / rho;
}

/// Discrete least-squares functional over a fixed (mesh, problem, config)
/// triplet, with exact parameter gradients.
///
///   interior = sum_K (v_beta + gamma_hat v - f)^2(x_K) |K|
///   boundary = sum_E (|beta.n| (v - g)^2)(x_E) |E|
///
/// v_beta is the backward quotient along the unit beta direction, multiplied by
/// |beta(x_K)| when scale_fd_by_beta_norm is set (v_beta = beta . grad v needs
/// the magnitude for non-unit fields). All problem data is sampled once at
/// construction; repeated evaluations touch only network state.
///
/// Sums are accumulated per fixed-width block and reduced in block order, so
/// results are bit-identical for any worker count.
class LossEvaluator {
public:
    LossEvaluator(const IntegrationMesh& mesh, const BenchmarkProblem& problem,
                  LossConfig cfg, bool require_rho_below_h = true)
        : cfg_(cfg) {
        if (!(cfg.rho > 0.0)) throw ConfigError("LossEvaluator: rho must be positive");
        if (require_rho_below_h && !(cfg.rho < mesh.h))
            throw ConfigError("LossEvaluator: rho must be smaller than the mesh size h");
        if (!(cfg.boundary_weight > 0.0))
            throw ConfigError("LossEvaluator: boundary_weight must be positive");
        if (mesh.inflow_edges.empty())
            throw ConfigError("LossEvaluator: empty inflow partition; problem is ill-posed");

        const std::size_t nc = mesh.cells.size();
        cell_x_.resize(nc);
        cell_back_.resize(nc);
        cell_w_.resize(nc);
        cell_gamma_.resize(nc);
        cell_f_.resize(nc);
        cell_scale_.resize(nc);
        for (std::size_t k = 0; k < nc; ++k) {
            const Cell& c = mesh.cells[k];
            const Vec2 b = problem.beta(c.centroid);
            const double m = norm(b);
            if (m == 0.0)
                throw ConfigError("LossEvaluator: velocity field vanishes at a quadrature point");
            cell_x_[k] = c.centroid;
            cell_back_[k] = c.centroid - (cfg.rho / m) * b;
            cell_w_[k] = c.measure;
            cell_gamma_[k] = problem.gamma_hat(c.centroid);
            cell_f_[k] = problem.source(c.centroid);
            cell_scale_[k] = cfg.scale_fd_by_beta_norm ? m : 1.0;
        }
        const std::size_t ne = mesh.inflow_edges.size();
        edge_x_.resize(ne);
        edge_w_.resize(ne);
        edge_g_.resize(ne);
        for (std::size_t k = 0; k < ne; ++k) {
            const BoundaryEdge& e = mesh.inflow_edges[k];
            edge_x_[k] = e.centroid;
            edge_w_[k] = e.inflow_weight * e.measure;
            edge_g_[k] = problem.inflow_data(e.centroid);
        }
        cell_blocks_ = block_count(nc);
        edge_blocks_ = block_count(ne);
    }

    const LossConfig& config() const { return cfg_; }
    std::size_t cell_count() const { return cell_x_.size(); }
    std::size_t edge_count() const { return edge_x_.size(); }

    LossValue evaluate(const Parameters& params) const {
        return run(params, nullptr, false);
    }

    /// Loss with d(total)/dtheta accumulated into grad (resized to fit).
    LossValue evaluate_with_gradient(const Parameters& params, std::vector<double>& grad) const {
        return run(params, &grad, false);
    }

    /// Same functional with the data (f, g) replaced by zero; denominator of the
    /// reported loss ratio.
    LossValue evaluate_zero_data(const Parameters& params) const {
        return run(params, nullptr, true);
    }

    /// Functional value for an arbitrary callable v (serial; used by oracles
    /// and convergence checks).
    template <class F>
    LossValue evaluate_fn(const F& v) const {
        LossValue out;
        for (std::size_t k = 0; k < cell_x_.size(); ++k) {
            const double quotient = (v(cell_x_[k]) - v(cell_back_[k])) / cfg_.rho;
            const double r =
                cell_scale_[k] * quotient + cell_gamma_[k] * v(cell_x_[k]) - cell_f_[k];
            out.interior += r * r * cell_w_[k];
        }
        for (std::size_t k = 0; k < edge_x_.size(); ++k) {
            const double d = v(edge_x_[k]) - edge_g_[k];
            out.boundary += edge_w_[k] * d * d;
        }
        out.total = out.interior + cfg_.boundary_weight * out.boundary;
        return out;
    }

private:
    LossValue run(const Parameters& params, std::vector<double>* grad, bool zero_data) const {
        const std::size_t P = params.theta.size();
        const std::size_t stride = (P + 15) / 8 * 8;  // cache-line padding between blocks
        const std::size_t nb = cell_blocks_ + edge_blocks_;
        std::vector<double> part_loss(nb, 0.0);
        std::vector<double> part_grad;
        if (grad) part_grad.assign(nb * stride, 0.0);

        std::atomic<long> bad{-1};
        for_each_block(nb, [&](std::size_t blk) {
            EvalWorkspace ws0(params.arch), ws1(params.arch);
            double acc = 0.0;
            double* g = grad ? part_grad.data() + blk * stride : nullptr;
            if (blk < cell_blocks_) {
                const std::size_t lo = blk * kReductionBlock;
                const std::size_t hi = std::min(cell_x_.size(), lo + kReductionBlock);
                const double inv_rho = 1.0 / cfg_.rho;
                for (std::size_t k = lo; k < hi; ++k) {
                    const double v0 = forward(params, cell_x_[k], ws0);
                    const double v1 = forward(params, cell_back_[k], ws1);
                    const double sc = cell_scale_[k] * inv_rho;
                    const double r = sc * (v0 - v1) + cell_gamma_[k] * v0 -
                                     (zero_data ? 0.0 : cell_f_[k]);
                    if (std::isnan(r)) {
                        bad.store(static_cast<long>(k));
                        return;
                    }
                    acc += r * r * cell_w_[k];
                    if (g) {
                        const double c = 2.0 * r * cell_w_[k];
                        backward_accumulate(params, ws0, c * (sc + cell_gamma_[k]), g, ws0.delta);
                        backward_accumulate(params, ws1, -c * sc, g, ws1.delta);
                    }
                }
            } else {
                const std::size_t lo = (blk - cell_blocks_) * kReductionBlock;
                const std::size_t hi = std::min(edge_x_.size(), lo + kReductionBlock);
                const double alpha = cfg_.boundary_weight;
                for (std::size_t k = lo; k < hi; ++k) {
                    const double v = forward(params, edge_x_[k], ws0);
                    const double d = v - (zero_data ? 0.0 : edge_g_[k]);
                    if (std::isnan(d)) {
                        bad.store(static_cast<long>(cell_x_.size() + k));
                        return;
                    }
                    acc += edge_w_[k] * d * d;
                    if (g) backward_accumulate(params, ws0, 2.0 * alpha * edge_w_[k] * d, g, ws0.delta);
                }
            }
            part_loss[blk] = acc;
        });
        if (bad.load() >= 0) {
            const long k = bad.load();
            const bool is_cell = k < static_cast<long>(cell_x_.size());
            throw NumericError("LossEvaluator: NaN residual at " +
                               std::string(is_cell ? "cell " : "edge ") +
                               std::to_string(is_cell ? k : k - static_cast<long>(cell_x_.size())));
        }

        LossValue out;
        for (std::size_t b = 0; b < cell_blocks_; ++b) out.interior += part_loss[b];
        for (std::size_t b = cell_blocks_; b < nb; ++b) out.boundary += part_loss[b];
        out.total = out.interior + cfg_.boundary_weight * out.boundary;
        if (grad) {
            grad->assign(P, 0.0);
            for (std::size_t b = 0; b < nb; ++b) {
                const double* src = part_grad.data() + b * stride;
                for (std::size_t p = 0; p < P; ++p) (*grad)[p] += src[p];
            }
        }
        return out;
    }

    LossConfig cfg_;
    std::vector<Vec2> cell_x_, cell_back_;
    std::vector<double> cell_w_, cell_gamma_, cell_f_, cell_scale_;
    std::vector<Vec2> edge_x_;
    std::vector<double> edge_w_, edge_g_;
    std::size_t cell_blocks_ = 0, edge_blocks_ = 0;
};

/// One-shot evaluation of the discrete functional.
inline LossValue discrete_loss(const Parameters& params, const IntegrationMesh& mesh,
                               const BenchmarkProblem& problem, const LossConfig& cfg) {
    return LossEvaluator(mesh, problem, cfg).evaluate(params);
}

/// One-shot exact gradient of the discrete functional.
inline std::vector<double> loss_gradient(const Parameters& params, const IntegrationMesh& mesh,
                                         const BenchmarkProblem& problem, const LossConfig& cfg) {
    std::vector<double> grad;
    LossEvaluator(mesh, problem, cfg).evaluate_with_gradient(params, grad);
    return grad;
}

/// The functional re-evaluated on a finer quadrature mesh with the same rho;
/// approximates the continuous least-squares functional for reporting.
inline LossValue refined_loss(const Parameters& params, const BenchmarkProblem& problem,
                              double fine_h, const LossConfig& cfg) {
    IntegrationMesh mesh =
        build_inflow_partition(build_uniform_mesh(problem.domain, fine_h), problem.beta);
    return LossEvaluator(mesh, problem, cfg, /*require_rho_below_h=*/false).evaluate(params);
}

}  // namespace lsnn
