#pragma once

// Shared helpers for the test suites: random networks, kink-margin checks, and
// an independent fine-grid quadrature oracle for L2 errors.

#include <cmath>
#include <functional>

#include "lsnn/network.hpp"

namespace lsnn::testing {

inline Parameters random_network(const Architecture& arch, std::uint64_t seed,
                                 double scale = 1.0) {
    Parameters p(arch);
    Rng rng(seed);
    for (double& v : p.theta) v = rng.uniform(-scale, scale);
    return p;
}

/// Smallest |pre-activation| over all hidden layers at x; gradient checks
/// require this to clear a margin so finite differences cannot cross a kink.
inline double kink_margin(const Parameters& params, Vec2 x) {
    EvalWorkspace ws(params.arch);
    forward(params, x, ws);
    double m = std::numeric_limits<double>::infinity();
    const int L = params.arch.depth();
    for (int l = 1; l < L; ++l)
        for (int i = 0; i < params.arch.widths[l]; ++i)
            m = std::min(m, std::abs(ws.pre[ws.pre_off[l - 1] + i]));
    return m;
}

/// Midpoint-rule L2 distance of two callables on a fine grid; independent of
/// the library's quadrature machinery.
template <class F, class G>
double grid_l2_error(const F& f, const G& g, const Domain& dom, double h) {
    const long nx = std::lround(dom.width() / h);
    const long ny = std::lround(dom.height() / h);
    double acc = 0.0;
    for (long j = 0; j < ny; ++j) {
        const double y = dom.y_lo + (j + 0.5) * h;
        double row = 0.0;
        for (long i = 0; i < nx; ++i) {
            const double x = dom.x_lo + (i + 0.5) * h;
            const double d = f(Vec2{x, y}) - g(Vec2{x, y});
            row += d * d;
        }
        acc += row;
    }
    return std::sqrt(acc * h * h);
}

}  // namespace lsnn::testing
