#include <catch_amalgamated.hpp>
#include <cstring>
#include <filesystem>
#include <numbers>

#include "lsnn/network.hpp"
#include "test_support.hpp"

using namespace lsnn;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

Parameters tiny_passthrough() {
    // 2-1-1: relu(x) forwarded unchanged
    Parameters p(Architecture({2, 1, 1}));
    p.weight(1, 0, 0) = 1.0;
    p.weight(2, 0, 0) = 1.0;
    return p;
}
}  // namespace

TEST_CASE("forward evaluation", "[network]") {
    const Parameters p = tiny_passthrough();
    CHECK(forward(p, {-3.0, 7.0}) == 0.0);
    CHECK(forward(p, {2.0, 5.0}) == 2.0);

    const Parameters ramp = ramp_step_network({{1.0, 0.0}, kPi / 3, 0.0, 1.0, 0.1});
    CHECK(forward(ramp, {kPi / 3, 0.4}) == Catch::Approx(0.5));  // ramp midpoint
    CHECK(forward(ramp, {kPi / 3 + 0.2, 0.9}) == Catch::Approx(1.0));
}

TEST_CASE("parameter gradients", "[network]") {
    SECTION("hand-computed entries of the tiny net") {
        const Parameters p = tiny_passthrough();
        const std::vector<double> g = parameter_gradient(p, {2.0, 5.0});
        // layout: [w11 w12 b1 | w21 b2]
        CHECK(g[3] == Catch::Approx(2.0));   // d/dw2 = relu(2)
        CHECK(g[4] == Catch::Approx(-1.0));  // output bias is subtracted
    }
    SECTION("output bias gradient is -1 for any net") {
        const Parameters p = testing::random_network(Architecture({2, 5, 5, 1}), 99);
        const std::vector<double> g = parameter_gradient(p, {0.37, -0.12});
        CHECK(g.back() == Catch::Approx(-1.0));
    }
    SECTION("matches central finite differences off the kinks") {
        for (const char* spec : {"2-4-1", "2-5-5-1", "2-6-6-1"}) {
            const Architecture arch = Architecture::parse(spec);
            int checked = 0;
            for (std::uint64_t seed = 1; checked < 20 && seed < 200; ++seed) {
                Parameters p = testing::random_network(arch, seed);
                Rng rng(seed * 31 + 7);
                const Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
                if (testing::kink_margin(p, x) < 1e-4) continue;
                ++checked;
                const std::vector<double> g = parameter_gradient(p, x);
                const double step = 1e-6;
                for (std::size_t i = 0; i < p.theta.size(); ++i) {
                    const double save = p.theta[i];
                    p.theta[i] = save + step;
                    const double hi = forward(p, x);
                    p.theta[i] = save - step;
                    const double lo = forward(p, x);
                    p.theta[i] = save;
                    const double fd = (hi - lo) / (2 * step);
                    const double scale = std::max({1.0, std::abs(fd), std::abs(g[i])});
                    REQUIRE(std::abs(fd - g[i]) / scale <= 1e-6);
                }
            }
            REQUIRE(checked == 20);
        }
    }
}

TEST_CASE("positive homogeneity of first-layer scaling", "[network]") {
    const Architecture arch = Architecture::parse("2-6-1");
    const Parameters base = testing::random_network(arch, 5);
    Parameters scaled = base;
    const double lambda = 3.7;
    for (int i = 0; i < arch.widths[1]; ++i) {
        scaled.weight(1, i, 0) *= lambda;
        scaled.weight(1, i, 1) *= lambda;
        scaled.bias(1, i) *= lambda;
        scaled.weight(2, 0, i) /= lambda;
    }
    Rng rng(123);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        REQUIRE(forward(base, x) == Catch::Approx(forward(scaled, x)).margin(1e-12));
    }
}

TEST_CASE("parameter counts match the reference tables", "[network]") {
    const std::pair<const char*, long> table[] = {
        {"2-4-1", 13},        {"2-200-1", 601},      {"2-6-1", 19},  {"2-40-1", 121},
        {"2-34-1", 103},      {"2-5-5-1", 46},       {"2-6-6-1", 61}, {"2-8-8-1", 97},
        {"2-25-25-1", 726},   {"2-40-40-1", 1761},   {"2-30-30-30-1", 1951},
        {"2-20-1", 61},       {"2-30-1", 91},
    };
    for (const auto& [spec, expected] : table)
        CHECK(effective_param_count(Architecture::parse(spec)) == expected);
    CHECK(raw_param_count(Architecture::parse("2-4-1")) == 17);
    CHECK(raw_param_count(Architecture::parse("2-5-5-1")) == 51);
}

TEST_CASE("ramp step construction", "[network]") {
    const double eps = GENERATE(0.2, 0.1, 0.05);
    const Domain dom(0.0, 2.0, 0.0, 1.0);
    const RampStepSpec spec{{1.0, 0.0}, kPi / 3, 0.0, 1.0, eps};
    const Parameters p = ramp_step_network(spec);

    SECTION("exact plateaus") {
        Rng rng(17);
        for (int k = 0; k < 500; ++k) {
            const double y = rng.uniform(0, 1);
            const double below = rng.uniform(0.0, kPi / 3 - eps);
            const double above = rng.uniform(kPi / 3 + eps, 2.0);
            REQUIRE(forward(p, {below, y}) == 0.0);
            REQUIRE(forward(p, {above, y}) == 1.0);
        }
    }
    SECTION("fine-quadrature error equals sqrt(eps/6) and obeys the bound") {
        auto chi = [](Vec2 q) { return q.x < kPi / 3 ? 0.0 : 1.0; };
        auto net = [&](Vec2 q) { return forward(p, q); };
        const double err = testing::grid_l2_error(chi, net, dom, 1e-3);
        REQUIRE_THAT(err, Catch::Matchers::WithinRel(std::sqrt(eps / 6.0), 1e-3));
        const double bound = std::pow(5.0, 0.25) / std::sqrt(6.0) * std::sqrt(eps);
        REQUIRE(err <= bound);
    }
    SECTION("invalid spec") {
        REQUIRE_THROWS_AS(ramp_step_network({{1, 0}, 0.5, 0, 1, -0.1}), ConfigError);
    }
}

TEST_CASE("ramp max construction", "[network]") {
    const double a = 43.0 / 64.0;
    const RampStepMaxSpec spec{{1.0, kSqrt2 - 1.0}, {kSqrt2 - 1.0, 1.0}, a, -1.0, 1.0, 0.05};
    const Parameters p = ramp_step_max_network(spec);
    const Parameters p1 = ramp_step_network({spec.normal1, a, -1.0, 1.0, 0.05});
    const Parameters p2 = ramp_step_network({spec.normal2, a, -1.0, 1.0, 0.05});

    SECTION("gadget identity on a sample pair") {
        // max{3,5} = (sigma(8) - sigma(-8) + sigma(-2) + sigma(2)) / 2
        CHECK(0.5 * (8.0 - 0.0 + 0.0 + 2.0) == 5.0);
    }
    SECTION("equals the max of the two ramps pointwise") {
        Rng rng(3);
        for (int k = 0; k < 10000; ++k) {
            const Vec2 x{rng.uniform(0, 1), rng.uniform(0, 1)};
            const double expected = std::max(forward(p1, x), forward(p2, x));
            REQUIRE(std::abs(forward(p, x) - expected) <= 1e-14);
        }
    }
    SECTION("agrees with the owning ramp inside each sector") {
        Rng rng(4);
        for (int k = 0; k < 1000; ++k) {
            const double x = rng.uniform(0, 1), y = rng.uniform(0, 1);
            const Parameters& own = y < x ? p1 : p2;
            REQUIRE(forward(p, {x, y}) == Catch::Approx(forward(own, {x, y})).margin(1e-14));
        }
    }
}

TEST_CASE("breaking lines", "[network]") {
    SECTION("first-layer lines clip to the rectangle") {
        Parameters p(Architecture({2, 2, 1}));
        p.weight(1, 0, 0) = 1.0;  // x = 1.02882
        p.bias(1, 0) = 1.02882;
        p.weight(1, 1, 1) = 1.0;  // y = 2: misses the domain
        p.bias(1, 1) = 2.0;
        const auto segs = breaking_lines(p, Domain(0, 2, 0, 1));
        REQUIRE(segs.size() == 1);
        CHECK(segs[0].a.x == Catch::Approx(1.02882));
        CHECK(segs[0].b.x == Catch::Approx(1.02882));
        CHECK(std::abs(segs[0].a.y - segs[0].b.y) == Catch::Approx(1.0));
    }
    SECTION("ramp construction yields the two offset lines") {
        const Parameters p = ramp_step_network({{1.0, 0.0}, kPi / 3, 0.0, 1.0, 0.1});
        const auto segs = breaking_lines(p, Domain(0, 2, 0, 1));
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].a.x == Catch::Approx(kPi / 3 - 0.1));
        CHECK(segs[1].a.x == Catch::Approx(kPi / 3 + 0.1));
    }
    SECTION("deep-layer contours recover a known second-layer line") {
        // second layer computes relu(a1 - 0.5) with a1 = relu(x): kink near x = 0.5
        Parameters p(Architecture({2, 1, 1, 1}));
        p.weight(1, 0, 0) = 1.0;
        p.weight(2, 0, 0) = 1.0;
        p.bias(2, 0) = 0.5;
        p.weight(3, 0, 0) = 1.0;
        const auto segs = breaking_lines(p, Domain(0, 1, 0, 1), 100);
        REQUIRE_FALSE(segs.empty());
        for (const auto& s : segs) {
            CHECK(s.layer == 2);
            CHECK(s.a.x == Catch::Approx(0.5).margin(0.02));
            CHECK(s.b.x == Catch::Approx(0.5).margin(0.02));
        }
    }
}

TEST_CASE("checkpoint round trip is bit faithful", "[network]") {
    const Parameters p = testing::random_network(Architecture({2, 5, 3, 1}), 42, 2.0);
    const auto path = std::filesystem::temp_directory_path() / "lsnn_ckpt_test.txt";
    save_checkpoint(p, path.string());
    const Parameters q = load_checkpoint(path.string());
    REQUIRE(q.arch == p.arch);
    REQUIRE(q.theta.size() == p.theta.size());
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
        REQUIRE(std::memcmp(&p.theta[i], &q.theta[i], sizeof(double)) == 0);
    }
    std::filesystem::remove(path);
}
