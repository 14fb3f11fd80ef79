#include "homogl/fields.hpp"

#include <algorithm>
#include <cmath>

namespace homogl {

double ComplexField::max_modulus() const {
    double m = 0.0;
    for (const Complex& z : v) m = std::max(m, std::abs(z));
    return m;
}

MatrixField sample_matrix_field(const Material& mat, const Grid2D& grid, double delta) {
    if (!(mat.m > 0.0) || mat.M < mat.m) throw Error("sample_matrix_field: need 0 < m <= M");
    if (delta < 0.0) throw Error("sample_matrix_field: delta must be positive");
    MatrixField F(grid, mat.m, mat.M);
    const double inv_delta = delta > 0.0 ? 1.0 / delta : 1.0;
    const double tol = 1e-12;
    for (std::size_t j = 0; j < grid.ny; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            Vec2 y = grid.node(i, j);
            if (delta > 0.0) y = inv_delta * y;
            const Mat2 a = mat.A(y);
            if (a.eig_min() < mat.m - tol || a.eig_max() > mat.M + tol)
                throw Error("sample_matrix_field: eigenvalue outside [m, M] at node (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
            F.set(i, j, a);
        }
    }
    return F;
}

std::vector<std::size_t> boundary_loop(const Grid2D& grid) {
    if (grid.periodic_x || grid.periodic_y) throw Error("boundary_loop: grid has no boundary on a periodic axis");
    std::vector<std::size_t> loop;
    loop.reserve(2 * (grid.nx + grid.ny) - 4);
    for (std::size_t i = 0; i < grid.nx; ++i) loop.push_back(grid.idx(i, 0));
    for (std::size_t j = 1; j < grid.ny; ++j) loop.push_back(grid.idx(grid.nx - 1, j));
    for (std::size_t i = grid.nx - 1; i-- > 0;) loop.push_back(grid.idx(i, grid.ny - 1));
    for (std::size_t j = grid.ny - 1; j-- > 1;) loop.push_back(grid.idx(0, j));
    return loop;
}

BoundaryData make_boundary_degree_d(const Grid2D& grid, int d, Vec2 center) {
    if (d < 0) throw Error("make_boundary_degree_d: degree must be nonnegative");
    const double x1 = grid.origin.x + double(grid.nx - 1) * grid.hx;
    const double y1 = grid.origin.y + double(grid.ny - 1) * grid.hy;
    if (!(center.x > grid.origin.x && center.x < x1 && center.y > grid.origin.y && center.y < y1))
        throw Error("make_boundary_degree_d: center must lie strictly inside the domain");

    BoundaryData g;
    g.degree = d;
    g.loop = boundary_loop(grid);
    g.samples.reserve(g.loop.size());
    for (std::size_t k : g.loop) {
        const std::size_t i = k % grid.nx;
        const std::size_t j = k / grid.nx;
        const Vec2 z = grid.node(i, j) - center;
        const double th = std::atan2(z.y, z.x);
        g.samples.emplace_back(std::cos(d * th), std::sin(d * th));
    }
    return g;
}

int winding_of_samples(const std::vector<Complex>& samples, double* defect) {
    if (samples.size() < 3) throw Error("winding_of_samples: need at least 3 samples");
    double total = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const Complex a = samples[k];
        const Complex b = samples[(k + 1) % samples.size()];
        if (std::abs(a) == 0.0 || std::abs(b) == 0.0)
            throw Error("winding_of_samples: zero sample, phase undefined");
        total += std::arg(b * std::conj(a));
    }
    const double w = total / (2.0 * M_PI);
    const int wi = int(std::lround(w));
    if (defect) *defect = std::abs(w - double(wi));
    return wi;
}

void impose_boundary(ComplexField& u, const BoundaryData& g) {
    if (g.loop.size() != 2 * (u.grid.nx + u.grid.ny) - 4)
        throw Error("impose_boundary: boundary data does not match the grid");
    for (std::size_t k = 0; k < g.loop.size(); ++k) {
        u.v[g.loop[k]] = g.samples[k];
        u.boundary_mask[g.loop[k]] = 1;
    }
}

}  // namespace homogl
