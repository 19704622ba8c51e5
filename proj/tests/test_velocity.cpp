#include <catch_amalgamated.hpp>
#include <numbers>

#include "lsnn/velocity.hpp"

using namespace lsnn;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
}  // namespace

TEST_CASE("field evaluation", "[velocity]") {
    SECTION("rotational") {
        const Vec2 b = VelocityField::rotational()({0.3, 0.4});
        CHECK(b.x == Catch::Approx(-0.4));
        CHECK(b.y == Catch::Approx(0.3));
    }
    SECTION("two-sector picks the y < x branch strictly") {
        const VelocityField f = VelocityField::two_sector();
        const Vec2 lower = f({0.7, 0.2});
        CHECK(lower.x == Catch::Approx(1.0 - kSqrt2));
        CHECK(lower.y == Catch::Approx(1.0));
        const Vec2 on_ray = f({0.5, 0.5});  // y >= x branch
        CHECK(on_ray.x == Catch::Approx(-1.0));
        CHECK(on_ray.y == Catch::Approx(kSqrt2 - 1.0));
    }
    SECTION("chord field in the first sector") {
        const Vec2 b = VelocityField::sectors(4)({0.9, 0.1});  // angle < pi/8
        CHECK(b.x == Catch::Approx(std::cos(kPi / 8) - 1.0));
        CHECK(b.y == Catch::Approx(std::sin(kPi / 8)));
    }
    SECTION("degenerate points resolve to sector 0") {
        const VelocityField f = VelocityField::sectors(3);
        CHECK(f.sector_index({0.0, 0.0}) == 0);
        CHECK(f.sector_index({0.5, 0.0}) == 0);
    }
}

TEST_CASE("unit directions", "[velocity]") {
    SECTION("constant") {
        const Vec2 u = unit_direction(VelocityField::constant({0, 1}), {0.4, 0.9});
        CHECK(u.x == 0.0);
        CHECK(u.y == 1.0);
    }
    SECTION("rotational on the unit circle is already unit") {
        const Vec2 u = unit_direction(VelocityField::rotational(), {0.6, 0.8});
        CHECK(u.x == Catch::Approx(-0.8).margin(1e-15));
        CHECK(u.y == Catch::Approx(0.6).margin(1e-15));
    }
    SECTION("two-sector lower branch") {
        const Vec2 u = unit_direction(VelocityField::two_sector(), {0.8, 0.1});
        const double n = std::sqrt(4.0 - 2.0 * kSqrt2);
        CHECK(u.x == Catch::Approx((1.0 - kSqrt2) / n).epsilon(1e-12));
        CHECK(u.y == Catch::Approx(1.0 / n).epsilon(1e-12));
    }
    SECTION("vanishing field is an error") {
        REQUIRE_THROWS_AS(unit_direction(VelocityField::rotational(), {0.0, 0.0}), NumericError);
    }
}

TEST_CASE("two chords match the two-sector field up to scale", "[velocity]") {
    const VelocityField chords = VelocityField::sectors(2);
    const VelocityField two = VelocityField::two_sector();
    Rng rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const Vec2 p{rng.uniform(1e-6, 1.0), rng.uniform(1e-6, 1.0)};
        const Vec2 a = chords(p);
        const Vec2 b = two(p);
        // same direction
        const Vec2 ua = unit_direction(chords, p), ub = unit_direction(two, p);
        REQUIRE(std::abs(ua.x - ub.x) < 1e-12);
        REQUIRE(std::abs(ua.y - ub.y) < 1e-12);
        // scale factor sqrt(2)/2
        REQUIRE(norm(a) / norm(b) == Catch::Approx(kSqrt2 / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("sector partition covers the square exactly once", "[velocity]") {
    Rng rng(7);
    for (int n : {2, 3, 4, 5}) {
        const double delta = kPi / (2.0 * n);
        for (int trial = 0; trial < 2500; ++trial) {
            const Vec2 p{rng.uniform(1e-9, 1.0), rng.uniform(1e-9, 1.0)};
            int hits = 0, idx = -1;
            for (int i = 0; i < n; ++i) {
                const double t0 = i * delta, t1 = (i + 1) * delta;
                if (std::sin(t0) * p.x < std::cos(t0) * p.y &&
                    std::sin(t1) * p.x >= std::cos(t1) * p.y) {
                    ++hits;
                    idx = i;
                }
            }
            REQUIRE(hits == 1);
            REQUIRE(VelocityField::sectors(n).sector_index(p) == idx);
        }
    }
}

TEST_CASE("rotational field is divergence free", "[velocity]") {
    const VelocityField f = VelocityField::rotational();
    Rng rng(11);
    const double d = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const Vec2 p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
        const double div = (f({p.x + d, p.y}).x - f({p.x - d, p.y}).x) / (2 * d) +
                           (f({p.x, p.y + d}).y - f({p.x, p.y - d}).y) / (2 * d);
        REQUIRE(std::abs(div) <= 1e-8);
    }
}

TEST_CASE("field parsing round-trips", "[velocity]") {
    CHECK(VelocityField::parse("rotational").kind() == VelocityField::Kind::rotational);
    CHECK(VelocityField::parse("two-sector").kind() == VelocityField::Kind::two_sector);
    CHECK(VelocityField::parse("sectors:5").sector_count() == 5);
    const VelocityField c = VelocityField::parse("constant:0.5,-2");
    CHECK(c({0, 0}).x == Catch::Approx(0.5));
    CHECK(c({0, 0}).y == Catch::Approx(-2.0));
    REQUIRE_THROWS_AS(VelocityField::parse("spiral"), ConfigError);
    REQUIRE_THROWS_AS(VelocityField::parse("sectors:1"), ConfigError);
    REQUIRE_THROWS_AS(VelocityField::parse("constant:0,0"), ConfigError);
}
