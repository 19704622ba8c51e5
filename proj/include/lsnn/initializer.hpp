#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "lsnn/loss.hpp"
#include "lsnn/network.hpp"
#include "lsnn/problem.hpp"

namespace lsnn {

/// One first-layer breaking line omega . x = b with |omega| = 1.
struct Hyperplane {
    Vec2 omega;
    double b;
};

/// First-layer ramp basis; the constant function phi_0 = 1 is implicit.
struct BasisSet {
    std::vector<Hyperplane> planes;
};

/// ceil(n1/2) vertical lines and floor(n1/2) horizontal lines forming a uniform
/// partition of the rectangle (the odd extra line goes vertical).
inline BasisSet uniform_hyperplanes(const Domain& domain, int n1) {
    if (n1 < 1) throw ConfigError("uniform_hyperplanes: need n1 >= 1");
    BasisSet basis;
    const int nv = (n1 + 1) / 2, nh = n1 / 2;
    for (int k = 1; k <= nv; ++k)
        basis.planes.push_back({{1.0, 0.0}, domain.x_lo + k * domain.width() / (nv + 1)});
    for (int k = 1; k <= nh; ++k)
        basis.planes.push_back({{0.0, 1.0}, domain.y_lo + k * domain.height() / (nh + 1)});
    return basis;
}

/// Dense symmetric Galerkin system A c = F for the output-layer fit.
struct GalerkinSystem {
    int n = 0;              // n1 + 1 (constant included)
    std::vector<double> A;  // row-major n x n, symmetric
    std::vector<double> F;
};

namespace detail {

/// Sign-normalized representation: first nonzero component of omega positive.
inline Hyperplane sign_normalize(Hyperplane h) {
    if (h.omega.x < 0.0 || (h.omega.x == 0.0 && h.omega.y < 0.0))
        return {{-h.omega.x, -h.omega.y}, -h.b};
    return h;
}

inline void check_distinct(const BasisSet& basis) {
    for (std::size_t i = 0; i < basis.planes.size(); ++i)
        for (std::size_t j = i + 1; j < basis.planes.size(); ++j) {
            const Hyperplane a = sign_normalize(basis.planes[i]);
            const Hyperplane b = sign_normalize(basis.planes[j]);
            if (std::abs(a.omega.x - b.omega.x) < 1e-12 &&
                std::abs(a.omega.y - b.omega.y) < 1e-12 && std::abs(a.b - b.b) < 1e-12)
                throw DegenerateBasisError("duplicate hyperplanes " + std::to_string(i) +
                                           " and " + std::to_string(j) + " in the basis");
        }
}

/// Assembles A_ij = a(phi_j, phi_i), F_i = f(phi_i) by midpoint quadrature.
/// `eval` fills phi values and exact directional derivatives (beta . grad phi)
/// at a point; index 0 is the constant function.
template <class BasisEval>
GalerkinSystem assemble_impl(int n, const BasisEval& eval, const IntegrationMesh& mesh,
                             const BenchmarkProblem& problem) {
    GalerkinSystem sys;
    sys.n = n;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    const std::size_t cell_blocks = block_count(mesh.cells.size());
    const std::size_t edge_blocks = block_count(mesh.inflow_edges.size());
    const std::size_t nb = cell_blocks + edge_blocks;
    std::vector<double> partA(nb * nn, 0.0), partF(nb * static_cast<std::size_t>(n), 0.0);

    for_each_block(nb, [&](std::size_t blk) {
        std::vector<double> val(n), dd(n), q(n);
        double* A = partA.data() + blk * nn;
        double* F = partF.data() + blk * n;
        if (blk < cell_blocks) {
            const std::size_t lo = blk * kReductionBlock;
            const std::size_t hi = std::min(mesh.cells.size(), lo + kReductionBlock);
            for (std::size_t k = lo; k < hi; ++k) {
                const Vec2 x = mesh.cells[k].centroid;
                const double w = mesh.cells[k].measure;
                eval(x, val, dd);
                const double gamma = problem.gamma_hat(x);
                const double fx = problem.source(x);
                for (int i = 0; i < n; ++i) q[i] = dd[i] + gamma * val[i];
                for (int i = 0; i < n; ++i) {
                    const double wi = w * q[i];
                    for (int j = i; j < n; ++j) A[static_cast<std::size_t>(i) * n + j] += wi * q[j];
                    F[i] += wi * fx;
                }
            }
        } else {
            const std::size_t lo = (blk - cell_blocks) * kReductionBlock;
            const std::size_t hi = std::min(mesh.inflow_edges.size(), lo + kReductionBlock);
            for (std::size_t k = lo; k < hi; ++k) {
                const BoundaryEdge& e = mesh.inflow_edges[k];
                const double w = e.inflow_weight * e.measure;
                eval(e.centroid, val, dd);
                const double gx = problem.inflow_data(e.centroid);
                for (int i = 0; i < n; ++i) {
                    const double wi = w * val[i];
                    for (int j = i; j < n; ++j)
                        A[static_cast<std::size_t>(i) * n + j] += wi * val[j];
                    F[i] += wi * gx;
                }
            }
        }
    });

    sys.A.assign(nn, 0.0);
    sys.F.assign(n, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const double* A = partA.data() + b * nn;
        const double* F = partF.data() + b * n;
        for (std::size_t e = 0; e < nn; ++e) sys.A[e] += A[e];
        for (int i = 0; i < n; ++i) sys.F[i] += F[i];
    }
    for (int i = 0; i < n; ++i)  // mirror the upper triangle
        for (int j = 0; j < i; ++j)
            sys.A[static_cast<std::size_t>(i) * n + j] = sys.A[static_cast<std::size_t>(j) * n + i];
    return sys;
}

}  // namespace detail

/// Galerkin system of the ramp basis {1, relu(omega_i . x - b_i)} in the
/// least-squares inner product, with exact ramp derivatives
/// (phi_i)_beta(x) = (beta(x) . omega_i) [omega_i . x > b_i].
inline GalerkinSystem assemble_galerkin(const BasisSet& basis, const IntegrationMesh& mesh,
                                        const BenchmarkProblem& problem) {
    detail::check_distinct(basis);
    const int n = static_cast<int>(basis.planes.size()) + 1;
    auto eval = [&](Vec2 x, std::vector<double>& val, std::vector<double>& dd) {
        val[0] = 1.0;
        dd[0] = 0.0;
        const Vec2 b = problem.beta(x);
        for (std::size_t i = 0; i < basis.planes.size(); ++i) {
            const Hyperplane& hp = basis.planes[i];
            const double z = dot(hp.omega, x) - hp.b;
            val[i + 1] = z > 0.0 ? z : 0.0;
            dd[i + 1] = z > 0.0 ? dot(b, hp.omega) : 0.0;
        }
    };
    return detail::assemble_impl(n, eval, mesh, problem);
}

/// Cholesky solve of the SPD system with one round of iterative refinement.
/// A non-positive pivot reports the offending value instead of returning garbage.
inline std::vector<double> solve_output_weights(const GalerkinSystem& sys) {
    const int n = sys.n;
    std::vector<double> L(sys.A);
    double diag_max = 0.0;
    for (int i = 0; i < n; ++i)
        diag_max = std::max(diag_max, std::abs(sys.A[static_cast<std::size_t>(i) * n + i]));
    const double tol = 1e-14 * std::max(diag_max, 1e-300);

    double smallest_pivot = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        double pivot = L[static_cast<std::size_t>(k) * n + k];
        for (int j = 0; j < k; ++j) {
            const double v = L[static_cast<std::size_t>(k) * n + j];
            pivot -= v * v;
        }
        smallest_pivot = std::min(smallest_pivot, pivot);
        if (!(pivot > tol)) {
            char msg[96];
            std::snprintf(msg, sizeof msg,
                          "solve_output_weights: factorization failed, smallest pivot %.3e",
                          pivot);
            throw DegenerateBasisError(msg);
        }
        const double lkk = std::sqrt(pivot);
        L[static_cast<std::size_t>(k) * n + k] = lkk;
        for (int i = k + 1; i < n; ++i) {
            double v = L[static_cast<std::size_t>(i) * n + k];
            for (int j = 0; j < k; ++j)
                v -= L[static_cast<std::size_t>(i) * n + j] * L[static_cast<std::size_t>(k) * n + j];
            L[static_cast<std::size_t>(i) * n + k] = v / lkk;
        }
    }

    auto solve_with_factor = [&](const std::vector<double>& rhs) {
        std::vector<double> y(rhs);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < i; ++j) y[i] -= L[static_cast<std::size_t>(i) * n + j] * y[j];
            y[i] /= L[static_cast<std::size_t>(i) * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) y[i] -= L[static_cast<std::size_t>(j) * n + i] * y[j];
            y[i] /= L[static_cast<std::size_t>(i) * n + i];
        }
        return y;
    };
    auto residual = [&](const std::vector<double>& c) {
        std::vector<double> r(sys.F);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i] -= sys.A[static_cast<std::size_t>(i) * n + j] * c[j];
        return r;
    };
    auto nrm2 = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double q : v) s += q * q;
        return std::sqrt(s);
    };

    std::vector<double> c = solve_with_factor(sys.F);
    const double f_norm = nrm2(sys.F);
    for (int round = 0; round < 3; ++round) {
        std::vector<double> r = residual(c);
        if (nrm2(r) <= 1e-10 * std::max(f_norm, 1e-300)) return c;
        const std::vector<double> d = solve_with_factor(r);
        for (int i = 0; i < n; ++i) c[i] += d[i];
    }
    if (nrm2(residual(c)) > 1e-10 * std::max(f_norm, 1e-300))
        throw NumericError("solve_output_weights: residual exceeds 1e-10 |F| (smallest pivot " +
                           std::to_string(smallest_pivot) + ")");
    return c;
}

/// Captured system and solution of the output-layer fit, for inspection dumps.
struct GalerkinTrace {
    GalerkinSystem system;
    std::vector<double> coefficients;
    bool valid = false;
};

/// Fits the output layer of `params` by freezing everything below it: the basis
/// is the constant plus the last-hidden activations, and the induced SPD system
/// is solved for the output weights (bias stores -c0 under the subtracted-bias
/// convention).
///
/// Randomly drawn hidden layers routinely contain dead neurons (inactive at
/// every quadrature point), whose columns vanish identically. Those are
/// excluded from the solve and their output weights set to zero, which is the
/// least-squares fit over the span the network actually realizes; genuine
/// near-dependence among live columns still raises the factorization error.
inline void solve_output_layer(Parameters& params, const IntegrationMesh& mesh,
                               const BenchmarkProblem& problem, GalerkinTrace* trace = nullptr) {
    const Architecture& a = params.arch;
    const int L = a.depth();
    const int nh = a.widths[L - 1];
    auto eval = [&](Vec2 x, std::vector<double>& val, std::vector<double>& dd) {
        std::vector<double> act;
        std::vector<Vec2> jac;
        hidden_activations_and_jacobian(params, x, act, jac);
        val[0] = 1.0;
        dd[0] = 0.0;
        const Vec2 b = problem.beta(x);
        for (int i = 0; i < nh; ++i) {
            val[i + 1] = act[i];
            dd[i + 1] = dot(b, jac[i]);
        }
    };
    GalerkinSystem sys = detail::assemble_impl(nh + 1, eval, mesh, problem);

    double diag_max = 0.0;
    for (int i = 0; i <= nh; ++i)
        diag_max = std::max(diag_max, sys.A[static_cast<std::size_t>(i) * (nh + 1) + i]);
    std::vector<int> live;
    for (int i = 0; i <= nh; ++i)
        if (i == 0 || sys.A[static_cast<std::size_t>(i) * (nh + 1) + i] > 1e-12 * diag_max)
            live.push_back(i);

    GalerkinSystem reduced;
    reduced.n = static_cast<int>(live.size());
    reduced.A.resize(static_cast<std::size_t>(reduced.n) * reduced.n);
    reduced.F.resize(reduced.n);
    for (int i = 0; i < reduced.n; ++i) {
        reduced.F[i] = sys.F[live[i]];
        for (int j = 0; j < reduced.n; ++j)
            reduced.A[static_cast<std::size_t>(i) * reduced.n + j] =
                sys.A[static_cast<std::size_t>(live[i]) * (nh + 1) + live[j]];
    }
    const std::vector<double> c_red = solve_output_weights(reduced);
    std::vector<double> c(nh + 1, 0.0);
    for (int i = 0; i < reduced.n; ++i) c[live[i]] = c_red[i];

    for (int i = 0; i < nh; ++i) params.weight(L, 0, i) = c[i + 1];
    params.bias(L, 0) = -c[0];
    if (trace) {
        trace->system = std::move(sys);
        trace->coefficients = std::move(c);
        trace->valid = true;
    }
}

struct InitOptions {
    bool random_output = false;  // draw the output layer instead of solving for it
};

/// Network initialization: first layer from the uniform breaking-line partition;
/// for deeper networks the intermediate layers are drawn uniformly on
/// [-sqrt(1/n_{l-1}), sqrt(1/n_{l-1})] from the seeded generator, and the output
/// layer is fitted by the frozen-basis solve (or drawn, behind the option).
inline Parameters initialize_network(const Architecture& arch, const Domain& domain,
                                     const IntegrationMesh& mesh, const BenchmarkProblem& problem,
                                     std::uint64_t seed, InitOptions opts = {},
                                     GalerkinTrace* trace = nullptr) {
    Parameters params(arch);
    const int L = arch.depth();
    const BasisSet basis = uniform_hyperplanes(domain, arch.widths[1]);
    for (int i = 0; i < arch.widths[1]; ++i) {
        params.weight(1, i, 0) = basis.planes[i].omega.x;
        params.weight(1, i, 1) = basis.planes[i].omega.y;
        params.bias(1, i) = basis.planes[i].b;
    }

    Rng rng(seed);
    for (int l = 2; l < L; ++l) {
        const double s = std::sqrt(1.0 / arch.widths[l - 1]);
        for (int i = 0; i < arch.widths[l]; ++i) {
            for (int j = 0; j < arch.widths[l - 1]; ++j)
                params.weight(l, i, j) = rng.uniform(-s, s);
            params.bias(l, i) = rng.uniform(-s, s);
        }
    }

    if (opts.random_output && L > 2) {
        const double s = std::sqrt(1.0 / arch.widths[L - 1]);
        for (int j = 0; j < arch.widths[L - 1]; ++j)
            params.weight(L, 0, j) = rng.uniform(-s, s);
        params.bias(L, 0) = rng.uniform(-s, s);
        return params;
    }
    solve_output_layer(params, mesh, problem, trace);
    return params;
}

}  // namespace lsnn
