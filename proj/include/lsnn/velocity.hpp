#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "lsnn/common.hpp"

namespace lsnn {

/// Advection velocity field beta(x). Immutable value object; evaluation is pure.
///
/// Variants:
///   constant   - fixed nonzero vector
///   two_sector - piecewise constant: (1-sqrt2, 1) where y < x, (-1, sqrt2-1) where y >= x
///   rotational - (-y, x)
///   sectors(n) - piecewise-constant approximation of the rotational field whose
///                streamlines replace the quarter circle by n chords; in the sector
///                between polar angles t_i = i*pi/(2n) and t_{i+1} the value is the
///                chord vector (cos t_{i+1} - cos t_i, sin t_{i+1} - sin t_i).
class VelocityField {
public:
    enum class Kind { constant, two_sector, rotational, sectors };

    static VelocityField constant(Vec2 b) {
        if (b.x == 0.0 && b.y == 0.0)
            throw ConfigError("VelocityField::constant: zero vector");
        return VelocityField(Kind::constant, b, 0);
    }
    static VelocityField two_sector() { return VelocityField(Kind::two_sector, {}, 0); }
    static VelocityField rotational() { return VelocityField(Kind::rotational, {}, 0); }
    static VelocityField sectors(int n) {
        if (n < 2) throw ConfigError("VelocityField::sectors: need n >= 2");
        return VelocityField(Kind::sectors, {}, n);
    }

    Kind kind() const { return kind_; }
    int sector_count() const { return n_; }

    /// Index of the sector containing x for the sectors variant.
    /// Sector i covers polar angles (t_i, t_{i+1}]; points on a boundary ray fall in
    /// the lower-index sector, and degenerate points (y <= 0, including the origin)
    /// resolve to sector 0.
    int sector_index(Vec2 p) const {
        for (int i = 0; i < n_; ++i) {
            const double t0 = angle(i), t1 = angle(i + 1);
            if (std::sin(t0) * p.x < std::cos(t0) * p.y &&
                std::sin(t1) * p.x >= std::cos(t1) * p.y)
                return i;
        }
        return 0;
    }

    Vec2 operator()(Vec2 p) const {
        switch (kind_) {
            case Kind::constant:
                return b_;
            case Kind::two_sector:
                return p.y < p.x ? Vec2{1.0 - std::numbers::sqrt2, 1.0}
                                 : Vec2{-1.0, std::numbers::sqrt2 - 1.0};
            case Kind::rotational:
                return {-p.y, p.x};
            case Kind::sectors: {
                const int i = sector_index(p);
                const double t0 = angle(i), t1 = angle(i + 1);
                return {std::cos(t1) - std::cos(t0), std::sin(t1) - std::sin(t0)};
            }
        }
        return {};
    }

    std::string name() const {
        switch (kind_) {
            case Kind::constant: {
                std::ostringstream os;
                os.precision(17);
                os << "constant:" << b_.x << "," << b_.y;
                return os.str();
            }
            case Kind::two_sector:
                return "two-sector";
            case Kind::rotational:
                return "rotational";
            case Kind::sectors:
                return "sectors:" + std::to_string(n_);
        }
        return {};
    }

    /// Parses the CLI spelling: "constant:<bx>,<by>", "two-sector", "rotational",
    /// "sectors:<n>".
    static VelocityField parse(const std::string& s) {
        if (s == "two-sector") return two_sector();
        if (s == "rotational") return rotational();
        if (s.rfind("sectors:", 0) == 0) return sectors(std::stoi(s.substr(8)));
        if (s.rfind("constant:", 0) == 0) {
            const std::string rest = s.substr(9);
            const auto comma = rest.find(',');
            if (comma == std::string::npos)
                throw ConfigError("VelocityField::parse: expected constant:<bx>,<by>");
            return constant({std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1))});
        }
        throw ConfigError("VelocityField::parse: unknown field '" + s + "'");
    }

private:
    VelocityField(Kind k, Vec2 b, int n) : kind_(k), b_(b), n_(n) {}

    double angle(int i) const {
        return static_cast<double>(i) * std::numbers::pi / (2.0 * n_);
    }

    Kind kind_;
    Vec2 b_;
    int n_;
};

/// beta(x) normalized to unit Euclidean length.
inline Vec2 unit_direction(const VelocityField& field, Vec2 p) {
    const Vec2 b = field(p);
    const double m = norm(b);
    if (m == 0.0)
        throw NumericError("unit_direction: velocity field vanishes at the requested point");
    return {b.x / m, b.y / m};
}

/// Reaction coefficient gamma_hat = gamma + div(beta), supplied directly per problem
/// (every shipped benchmark has divergence-free beta, so gamma_hat = gamma).
using ReactionCoefficient = std::function<double(Vec2)>;

inline ReactionCoefficient constant_reaction(double value) {
    return [value](Vec2) { return value; };
}

}  // namespace lsnn
