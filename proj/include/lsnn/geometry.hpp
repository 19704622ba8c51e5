#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lsnn/common.hpp"
#include "lsnn/velocity.hpp"

namespace lsnn {

/// Axis-aligned rectangular domain.
struct Domain {
    double x_lo, x_hi;
    double y_lo, y_hi;

    Domain(double x0, double x1, double y0, double y1)
        : x_lo(x0), x_hi(x1), y_lo(y0), y_hi(y1) {
        if (!(x_lo < x_hi) || !(y_lo < y_hi))
            throw ConfigError("Domain: require x_lo < x_hi and y_lo < y_hi");
    }

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }
    double area() const { return width() * height(); }
    bool contains(Vec2 p) const {
        return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi;
    }
};

/// Euclidean diagonal of the rectangle.
inline double diameter(const Domain& d) { return std::hypot(d.width(), d.height()); }

/// Quadrature cell: midpoint rule evaluates at the centroid, weighted by |K|.
struct Cell {
    Vec2 centroid;
    double measure;  // |K| = h^2 for uniform meshes
};

/// One boundary segment of the inflow partition.
struct BoundaryEdge {
    Vec2 centroid;
    double measure;        // |E| (segment length)
    Vec2 outward_normal;   // one of (+-1,0),(0,+-1)
    double inflow_weight;  // |beta(centroid) . n|
};

/// Interior cells plus the inflow-boundary partition, both in deterministic order
/// (cells row-major by centroid; edges bottom, right, top, left, increasing coordinate).
/// Immutable after construction; safe to share across threads.
struct IntegrationMesh {
    Domain domain;
    double h = 0.0;
    std::vector<Cell> cells;
    std::vector<BoundaryEdge> inflow_edges;
};

namespace detail {

inline std::size_t side_count(double length, double h, const char* dim) {
    const double ratio = length / h;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError(std::string("build_uniform_mesh: domain ") + dim +
                          "-extent is not an integer multiple of h");
    return static_cast<std::size_t>(rounded);
}

}  // namespace detail

/// Uniform square partition of the domain. Cells carry measure h^2 and
/// centroids at cell centers, ordered row-major (x fastest).
inline IntegrationMesh build_uniform_mesh(const Domain& domain, double h) {
    if (!(h > 0.0)) throw ConfigError("build_uniform_mesh: h must be positive");
    const std::size_t nx = detail::side_count(domain.width(), h, "x");
    const std::size_t ny = detail::side_count(domain.height(), h, "y");

    IntegrationMesh mesh{domain, h, {}, {}};
    mesh.cells.reserve(nx * ny);
    const double w = h * h;
    for (std::size_t j = 0; j < ny; ++j) {
        const double cy = domain.y_lo + (static_cast<double>(j) + 0.5) * h;
        for (std::size_t i = 0; i < nx; ++i) {
            const double cx = domain.x_lo + (static_cast<double>(i) + 0.5) * h;
            mesh.cells.push_back({{cx, cy}, w});
        }
    }
    return mesh;
}

/// Populates the inflow edges of `mesh`: every boundary segment of length h whose
/// centroid satisfies beta . n < 0 strictly. Segments with beta . n >= 0 are
/// dropped (an empty inflow set is legal output; the loss flags it later).
inline IntegrationMesh build_inflow_partition(IntegrationMesh mesh, const VelocityField& beta) {
    const Domain& d = mesh.domain;
    const double h = mesh.h;
    const std::size_t nx = static_cast<std::size_t>(std::round(d.width() / h));
    const std::size_t ny = static_cast<std::size_t>(std::round(d.height() / h));

    mesh.inflow_edges.clear();
    auto try_edge = [&](Vec2 c, Vec2 n) {
        const double bn = dot(beta(c), n);
        if (bn < 0.0) mesh.inflow_edges.push_back({c, h, n, -bn});
    };
    for (std::size_t i = 0; i < nx; ++i)  // bottom
        try_edge({d.x_lo + (static_cast<double>(i) + 0.5) * h, d.y_lo}, {0.0, -1.0});
    for (std::size_t j = 0; j < ny; ++j)  // right
        try_edge({d.x_hi, d.y_lo + (static_cast<double>(j) + 0.5) * h}, {1.0, 0.0});
    for (std::size_t i = 0; i < nx; ++i)  // top
        try_edge({d.x_lo + (static_cast<double>(i) + 0.5) * h, d.y_hi}, {0.0, 1.0});
    for (std::size_t j = 0; j < ny; ++j)  // left
        try_edge({d.x_lo, d.y_lo + (static_cast<double>(j) + 0.5) * h}, {-1.0, 0.0});
    return mesh;
}

}  // namespace lsnn
