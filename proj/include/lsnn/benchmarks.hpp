#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lsnn/problem.hpp"

namespace lsnn {

namespace detail {

inline double zero_fn(Vec2) { return 0.0; }

}  // namespace detail

/// Radius of the discontinuity for the two-sector / rotational family.
inline constexpr double kSectorJumpRadius = 43.0 / 64.0;

inline std::vector<std::string> builtin_problem_ids() {
    return {"vline", "diagonal", "smooth", "twojump", "twosector", "rotational"};
}

/// The shipped benchmark problems. Side conventions at each discontinuity are
/// strict (`<` on the low side) and shared by u, f and g, so residuals stay
/// consistent even where quadrature points land on an interface streamline.
inline BenchmarkProblem builtin_problem(const std::string& id) {
    const double pi = std::numbers::pi;
    const double s2 = std::numbers::sqrt2;

    if (id == "vline") {
        // (0,2)x(0,1), beta = (0,1): data jump at x = pi/3 transported upward.
        Domain dom(0.0, 2.0, 0.0, 1.0);
        auto step = [pi](Vec2 p) { return p.x < pi / 3.0 ? 0.0 : 1.0; };
        BenchmarkProblem prob{
            id,      dom,  VelocityField::constant({0.0, 1.0}),
            constant_reaction(0.0),
            detail::zero_fn,
            step,
            step,
            detail::zero_fn};
        prob.interface_clearance = [pi](Vec2 p) { return std::abs(p.x - pi / 3.0); };
        prob.default_section = parse_section("y=1", dom);
        return prob;
    }
    if (id == "diagonal") {
        // (-1,1)^2, beta = (1,1)/sqrt2, gamma_hat = 1, u = f = [y > x].
        Domain dom(-1.0, 1.0, -1.0, 1.0);
        auto step = [](Vec2 p) { return p.y > p.x ? 1.0 : 0.0; };
        BenchmarkProblem prob{
            id,  dom,  VelocityField::constant({1.0 / s2, 1.0 / s2}),
            constant_reaction(1.0),
            step,
            step,
            step,
            detail::zero_fn};
        prob.default_section = parse_section("y=-x", dom);
        return prob;
    }
    if (id == "smooth") {
        // (0,1)^2, beta = (1,1)/sqrt2: piecewise smooth with a unit jump on y = x.
        Domain dom(0.0, 1.0, 0.0, 1.0);
        auto u = [](Vec2 p) {
            return p.y > p.x ? std::sin(p.y - p.x) : std::cos(p.x - p.y);
        };
        BenchmarkProblem prob{
            id,  dom,  VelocityField::constant({1.0 / s2, 1.0 / s2}),
            constant_reaction(0.0),
            detail::zero_fn,
            u,
            u,
            detail::zero_fn};
        prob.default_section = parse_section("y=1-x", dom);
        return prob;
    }
    if (id == "twojump") {
        // (-1,1)x(0,1), beta = (1,1)/sqrt2, gamma_hat = 1; a sine bump riding on
        // x - y in (-0.9,-0.6) and a -1 block on x - y in (-0.2, 0.1).
        Domain dom(-1.0, 1.0, 0.0, 1.0);
        auto u = [pi](Vec2 p) {
            const double s = p.x - p.y;
            if (-0.9 < s && s < -0.6) return std::sin(pi * (s + 0.9) / 0.3);
            if (-0.2 < s && s < 0.1) return -1.0;
            return 0.0;
        };
        BenchmarkProblem prob{
            id,  dom,  VelocityField::constant({1.0 / s2, 1.0 / s2}),
            constant_reaction(1.0),
            u,
            u,
            u,
            detail::zero_fn};
        prob.default_boundary_weight = 10.0;
        prob.default_section = parse_section("y=0.8", dom);
        return prob;
    }
    if (id == "twosector") {
        // (0,1)^2, two-sector field; u jumps across the two chord segments
        // xi_1 . x = a (y < x) and xi_2 . x = a (y >= x), a = 43/64.
        Domain dom(0.0, 1.0, 0.0, 1.0);
        const double a = kSectorJumpRadius;
        const Vec2 xi1{1.0, s2 - 1.0}, xi2{s2 - 1.0, 1.0};
        auto u = [a, xi1, xi2](Vec2 p) {
            const Vec2 xi = p.y < p.x ? xi1 : xi2;
            return dot(xi, p) < a ? -1.0 : 1.0;
        };
        BenchmarkProblem prob{
            id,      dom,  VelocityField::two_sector(),
            constant_reaction(0.0),
            detail::zero_fn,
            u,
            u,
            detail::zero_fn};
        const double nrm = norm(xi1);
        prob.interface_clearance = [a, xi1, xi2, nrm](Vec2 p) {
            return std::min(std::abs(dot(xi1, p) - a), std::abs(dot(xi2, p) - a)) / nrm;
        };
        prob.default_section = parse_section("x=0", dom);
        return prob;
    }
    if (id == "rotational") {
        // (0,1)^2, beta = (-y, x); circular interface of radius a = 43/64.
        Domain dom(0.0, 1.0, 0.0, 1.0);
        const double a = kSectorJumpRadius;
        auto u = [a](Vec2 p) { return p.x * p.x + p.y * p.y < a * a ? -1.0 : 1.0; };
        BenchmarkProblem prob{
            id,      dom,  VelocityField::rotational(),
            constant_reaction(0.0),
            detail::zero_fn,
            u,
            u,
            detail::zero_fn};
        prob.default_rho_fraction = 0.1;
        prob.interface_clearance = [a](Vec2 p) { return std::abs(norm(p) - a); };
        prob.default_section = parse_section("x=0", dom);
        return prob;
    }
    throw ConfigError("builtin_problem: unknown id '" + id + "'");
}

}  // namespace lsnn
