#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lsnn/geometry.hpp"
#include "lsnn/velocity.hpp"

namespace lsnn {

/// A straight section through the domain used for solution traces.
/// Samples run from `a` to `b`; the reported abscissa interpolates t0 -> t1
/// (the coordinate the corresponding plot uses).
struct SectionLine {
    Vec2 a, b;
    double t0, t1;
    std::string label;
};

/// One advection-reaction boundary-value problem:
///   u_beta + gamma_hat u = f in Omega,  u = g on the inflow boundary.
///
/// exact_u_beta is the directional derivative almost everywhere; for the
/// piecewise-constant solutions it is zero off the discontinuous interface.
/// interface_clearance, when present, gives the distance to the set where
/// exact_u_beta is undefined; quadrature centroids are checked against it
/// before metric evaluation.
struct BenchmarkProblem {
    std::string id;
    Domain domain;
    VelocityField beta;
    ReactionCoefficient gamma_hat;
    std::function<double(Vec2)> source;       // f
    std::function<double(Vec2)> inflow_data;  // g, defined on the inflow boundary
    std::function<double(Vec2)> exact_u;
    std::function<double(Vec2)> exact_u_beta;

    BenchmarkProblem(std::string id_, Domain dom, VelocityField beta_,
                     ReactionCoefficient gamma, std::function<double(Vec2)> f,
                     std::function<double(Vec2)> g, std::function<double(Vec2)> u,
                     std::function<double(Vec2)> u_beta)
        : id(std::move(id_)),
          domain(dom),
          beta(std::move(beta_)),
          gamma_hat(std::move(gamma)),
          source(std::move(f)),
          inflow_data(std::move(g)),
          exact_u(std::move(u)),
          exact_u_beta(std::move(u_beta)) {}

    double default_boundary_weight = 1.0;
    double default_rho_fraction = 0.5;  // rho = fraction * h
    std::optional<std::function<double(Vec2)>> interface_clearance;
    SectionLine default_section{};
};

/// Parses a section spec: "x=<c>", "y=<c>", "y=[c][+|-]x" (e.g. "y=-x",
/// "y=1-x"), or "seg:x1,y1,x2,y2"; the result is clipped to the domain.
inline SectionLine parse_section(const std::string& spec, const Domain& dom) {
    auto fail = [&](const std::string& why) -> SectionLine {
        throw ConfigError("parse_section: " + why + " in '" + spec + "'");
    };
    if (spec.rfind("seg:", 0) == 0) {
        double v[4];
        std::string rest = spec.substr(4);
        for (auto& ch : rest)
            if (ch == ',') ch = ' ';
        std::istringstream is(rest);
        for (double& q : v)
            if (!(is >> q)) return fail("expected seg:x1,y1,x2,y2");
        return {{v[0], v[1]}, {v[2], v[3]}, 0.0, 1.0, spec};
    }
    if (spec.rfind("x=", 0) == 0) {
        const double c = std::stod(spec.substr(2));
        if (c < dom.x_lo || c > dom.x_hi) return fail("line misses the domain");
        return {{c, dom.y_lo}, {c, dom.y_hi}, dom.y_lo, dom.y_hi, spec};
    }
    if (spec.rfind("y=", 0) == 0) {
        // y = c + m x with m in {-1, 0, +1}
        std::string rhs = spec.substr(2);
        double m = 0.0, c = 0.0;
        const auto xpos = rhs.find('x');
        if (xpos == std::string::npos) {
            c = std::stod(rhs);
        } else {
            std::string pre = rhs.substr(0, xpos);
            if (pre.empty() || pre == "+") {
                m = 1.0;
            } else if (pre == "-") {
                m = -1.0;
            } else {
                const char sign = pre.back();
                if (sign != '+' && sign != '-') return fail("expected y=c(+|-)x");
                m = sign == '-' ? -1.0 : 1.0;
                c = std::stod(pre.substr(0, pre.size() - 1));
            }
        }
        double xa = dom.x_lo, xb = dom.x_hi;
        if (m > 0.0) {
            xa = std::max(xa, (dom.y_lo - c) / m);
            xb = std::min(xb, (dom.y_hi - c) / m);
        } else if (m < 0.0) {
            xa = std::max(xa, (dom.y_hi - c) / m);
            xb = std::min(xb, (dom.y_lo - c) / m);
        } else if (c < dom.y_lo || c > dom.y_hi) {
            return fail("line misses the domain");
        }
        if (!(xa < xb)) return fail("line misses the domain");
        return {{xa, c + m * xa}, {xb, c + m * xb}, xa, xb, spec};
    }
    return fail("unrecognized section form");
}

}  // namespace lsnn
