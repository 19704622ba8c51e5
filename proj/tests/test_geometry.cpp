#include <catch_amalgamated.hpp>
#include <numbers>

#include "lsnn/geometry.hpp"

using namespace lsnn;

TEST_CASE("uniform mesh layout", "[geometry]") {
    const Domain dom(0.0, 2.0, 0.0, 1.0);

    SECTION("coarse cells") {
        const IntegrationMesh mesh = build_uniform_mesh(dom, 0.5);
        REQUIRE(mesh.cells.size() == 8);
        CHECK(mesh.cells[0].centroid.x == Catch::Approx(0.25));
        CHECK(mesh.cells[0].centroid.y == Catch::Approx(0.25));
        for (const Cell& c : mesh.cells) CHECK(c.measure == Catch::Approx(0.25));
        // row-major: x sweeps first
        CHECK(mesh.cells[1].centroid.x == Catch::Approx(0.75));
        CHECK(mesh.cells[1].centroid.y == Catch::Approx(0.25));
        CHECK(mesh.cells[4].centroid.y == Catch::Approx(0.75));
    }
    SECTION("benchmark resolution") {
        CHECK(build_uniform_mesh(dom, 0.01).cells.size() == 20000);
        const IntegrationMesh unit = build_uniform_mesh(Domain(0, 1, 0, 1), 0.01);
        REQUIRE(unit.cells.size() == 10000);
        double total = 0.0;
        for (const Cell& c : unit.cells) total += c.measure;
        CHECK(total == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("non-divisible extent rejected with the dimension named") {
        REQUIRE_THROWS_MATCHES(build_uniform_mesh(dom, 0.3), ConfigError,
                               Catch::Matchers::MessageMatches(
                                   Catch::Matchers::ContainsSubstring("x-extent")));
        REQUIRE_THROWS_AS(build_uniform_mesh(Domain(0, 1, 0, 0.95), 0.1), ConfigError);
        REQUIRE_THROWS_AS(build_uniform_mesh(dom, -0.1), ConfigError);
    }
}

TEST_CASE("inflow partitions", "[geometry]") {
    SECTION("constant upward field: bottom only") {
        const Domain dom(0.0, 2.0, 0.0, 1.0);
        const IntegrationMesh mesh =
            build_inflow_partition(build_uniform_mesh(dom, 0.01), VelocityField::constant({0, 1}));
        REQUIRE(mesh.inflow_edges.size() == 200);
        for (const BoundaryEdge& e : mesh.inflow_edges) {
            CHECK(e.centroid.y == 0.0);
            CHECK(e.inflow_weight == Catch::Approx(1.0));
            CHECK(e.outward_normal == Vec2{0.0, -1.0});
        }
    }
    SECTION("rotational field: bottom and right with |beta.n| weights") {
        const IntegrationMesh mesh = build_inflow_partition(
            build_uniform_mesh(Domain(0, 1, 0, 1), 0.01), VelocityField::rotational());
        REQUIRE(mesh.inflow_edges.size() == 200);
        CHECK(mesh.inflow_edges[0].centroid.x == Catch::Approx(0.005));
        CHECK(mesh.inflow_edges[0].inflow_weight == Catch::Approx(0.005));
        // deterministic order: bottom sweep then right sweep
        CHECK(mesh.inflow_edges[100].outward_normal == Vec2{1.0, 0.0});
    }
    SECTION("diagonal field on the square: bottom and left, constant weight") {
        const double s = 1.0 / std::numbers::sqrt2;
        const IntegrationMesh mesh = build_inflow_partition(
            build_uniform_mesh(Domain(-1, 1, -1, 1), 0.01), VelocityField::constant({s, s}));
        REQUIRE(mesh.inflow_edges.size() == 400);
        for (const BoundaryEdge& e : mesh.inflow_edges)
            CHECK(e.inflow_weight == Catch::Approx(s));
    }
}

TEST_CASE("diameter", "[geometry]") {
    CHECK(diameter(Domain(0, 1, 0, 1)) == Catch::Approx(std::numbers::sqrt2));
    CHECK(diameter(Domain(0, 2, 0, 1)) == Catch::Approx(std::sqrt(5.0)));
    CHECK(diameter(Domain(-1, 1, -1, 1)) == Catch::Approx(2.0 * std::numbers::sqrt2));
}

TEST_CASE("partition of unity and strict classification", "[geometry]") {
    const Domain dom(0.0, 2.0, 0.0, 1.0);
    const VelocityField beta = VelocityField::rotational();
    for (double h : {0.1, 0.05, 0.01}) {
        const IntegrationMesh mesh = build_inflow_partition(build_uniform_mesh(dom, h), beta);
        double cell_total = 0.0;
        for (const Cell& c : mesh.cells) cell_total += c.measure;
        REQUIRE_THAT(cell_total, Catch::Matchers::WithinRel(dom.area(), 1e-12));

        // rotational on this rectangle: inflow = bottom (x>0) + right: length 3
        double edge_total = 0.0;
        for (const BoundaryEdge& e : mesh.inflow_edges) {
            edge_total += e.measure;
            CHECK(dot(beta(e.centroid), e.outward_normal) < 0.0);
        }
        REQUIRE_THAT(edge_total, Catch::Matchers::WithinRel(3.0, 1e-12));
    }
}

TEST_CASE("mesh construction is deterministic", "[geometry]") {
    const Domain dom(0.0, 1.0, 0.0, 1.0);
    const auto a = build_inflow_partition(build_uniform_mesh(dom, 0.05), VelocityField::rotational());
    const auto b = build_inflow_partition(build_uniform_mesh(dom, 0.05), VelocityField::rotational());
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].centroid == b.cells[i].centroid);
        CHECK(a.cells[i].measure == b.cells[i].measure);
    }
    REQUIRE(a.inflow_edges.size() == b.inflow_edges.size());
    for (std::size_t i = 0; i < a.inflow_edges.size(); ++i) {
        CHECK(a.inflow_edges[i].centroid == b.inflow_edges[i].centroid);
        CHECK(a.inflow_edges[i].inflow_weight == b.inflow_edges[i].inflow_weight);
    }
}
