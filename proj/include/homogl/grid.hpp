#pragma once

#include <cstddef>
#include <cstdint>

#include "homogl/core.hpp"

namespace homogl {

/// Structured node-centered grid. On a periodic axis the node count covers one
/// period without a duplicated seam node, so cells wrap around.
struct Grid2D {
    std::size_t nx = 0;
    std::size_t ny = 0;
    Vec2 origin{};
    double hx = 0.0;
    double hy = 0.0;
    bool periodic_x = false;
    bool periodic_y = false;

    Grid2D() = default;

    Grid2D(std::size_t nx_, std::size_t ny_, Vec2 origin_, double hx_, double hy_,
           bool per_x, bool per_y)
        : nx(nx_), ny(ny_), origin(origin_), hx(hx_), hy(hy_), periodic_x(per_x), periodic_y(per_y) {
        if (nx < 3 || ny < 3) throw Error("Grid2D: need at least 3 nodes per axis");
        if (!(hx > 0.0) || !(hy > 0.0)) throw Error("Grid2D: spacing must be positive");
    }

    /// Square-spacing grid (hx == hy == h).
    static Grid2D square(std::size_t nx, std::size_t ny, Vec2 origin, double h,
                         bool per_x = false, bool per_y = false) {
        return Grid2D(nx, ny, origin, h, h, per_x, per_y);
    }

    /// Unit cell Y = [0,1[² with n nodes per axis, fully periodic.
    static Grid2D unit_cell(std::size_t n) {
        return Grid2D(n, n, Vec2{0.0, 0.0}, 1.0 / double(n), 1.0 / double(n), true, true);
    }

    /// The square domain [-1,1]² with n nodes per side, Dirichlet-style.
    static Grid2D domain_square(std::size_t n) {
        const double h = 2.0 / double(n - 1);
        return Grid2D(n, n, Vec2{-1.0, -1.0}, h, h, false, false);
    }

    std::size_t size() const { return nx * ny; }
    std::size_t idx(std::size_t i, std::size_t j) const { return j * nx + i; }
    double x(std::size_t i) const { return origin.x + double(i) * hx; }
    double y(std::size_t j) const { return origin.y + double(j) * hy; }
    Vec2 node(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }

    std::size_t cells_x() const { return periodic_x ? nx : nx - 1; }
    std::size_t cells_y() const { return periodic_y ? ny : ny - 1; }

    bool on_boundary(std::size_t i, std::size_t j) const {
        const bool bx = !periodic_x && (i == 0 || i == nx - 1);
        const bool by = !periodic_y && (j == 0 || j == ny - 1);
        return bx || by;
    }

    /// Fraction of surrounding cells present (1 interior, 1/2 edge, 1/4 corner).
    double node_weight(std::size_t i, std::size_t j) const {
        double w = 1.0;
        if (!periodic_x && (i == 0 || i == nx - 1)) w *= 0.5;
        if (!periodic_y && (j == 0 || j == ny - 1)) w *= 0.5;
        return w;
    }

    /// Quadrature volume owned by a node.
    double node_volume(std::size_t i, std::size_t j) const { return hx * hy * node_weight(i, j); }

    bool same_layout(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny && periodic_x == o.periodic_x && periodic_y == o.periodic_y &&
               hx == o.hx && hy == o.hy && origin.x == o.origin.x && origin.y == o.origin.y;
    }
};

}  // namespace homogl
