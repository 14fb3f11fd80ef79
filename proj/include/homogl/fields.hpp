#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "homogl/core.hpp"
#include "homogl/grid.hpp"

namespace homogl {

struct ScalarField {
    Grid2D grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    double& at(std::size_t i, std::size_t j) { return v[grid.idx(i, j)]; }
    double at(std::size_t i, std::size_t j) const { return v[grid.idx(i, j)]; }
};

/// Order parameter on a grid. boundary_mask marks Dirichlet nodes whose values
/// solvers must never modify.
struct ComplexField {
    Grid2D grid;
    std::vector<Complex> v;
    std::vector<std::uint8_t> boundary_mask;

    ComplexField() = default;
    explicit ComplexField(const Grid2D& g, Complex fill = Complex(0.0, 0.0))
        : grid(g), v(g.size(), fill), boundary_mask(g.size(), 0) {}

    Complex& at(std::size_t i, std::size_t j) { return v[grid.idx(i, j)]; }
    Complex at(std::size_t i, std::size_t j) const { return v[grid.idx(i, j)]; }

    double max_modulus() const;
};

/// Analytic material: symmetric positive definite matrix closure with certified
/// spectral bounds spectrum(A(y)) ⊂ [m, M].
struct Material {
    std::string name;
    double m = 0.0;
    double M = 0.0;
    std::function<Mat2(Vec2)> A;
};

/// Per-node SPD matrix samples with the closure's certified bounds.
struct MatrixField {
    Grid2D grid;
    std::vector<double> a11, a12, a22;
    double m = 0.0;
    double M = 0.0;

    MatrixField() = default;
    MatrixField(const Grid2D& g, double m_, double M_)
        : grid(g), a11(g.size(), 0.0), a12(g.size(), 0.0), a22(g.size(), 0.0), m(m_), M(M_) {}

    Mat2 at(std::size_t i, std::size_t j) const {
        const std::size_t k = grid.idx(i, j);
        return {a11[k], a12[k], a22[k]};
    }
    void set(std::size_t i, std::size_t j, Mat2 a) {
        const std::size_t k = grid.idx(i, j);
        a11[k] = a.a11;
        a12[k] = a.a12;
        a22[k] = a.a22;
    }
};

/// Samples A(x/delta) at grid nodes (or A(x) when delta is not given, e.g. on the
/// unit cell). Verifies symmetry/spectrum against the closure's [m, M] to 1e-12.
MatrixField sample_matrix_field(const Material& mat, const Grid2D& grid, double delta = 0.0);

/// Unit-modulus Dirichlet samples of prescribed degree on the boundary loop of a
/// non-periodic grid.
struct BoundaryData {
    int degree = 0;
    std::vector<std::size_t> loop;      // node indices, counterclockwise
    std::vector<Complex> samples;       // |g| = 1 at every entry
};

/// Counterclockwise boundary node indices of a non-periodic grid, starting at
/// the (0,0) corner. Each node appears once.
std::vector<std::size_t> boundary_loop(const Grid2D& grid);

/// g(x) = (z/|z|)^d with z = (x - center); center must lie strictly inside.
BoundaryData make_boundary_degree_d(const Grid2D& grid, int d, Vec2 center);

/// Winding number of a closed loop of nonzero samples: sum of principal-branch
/// phase increments / 2pi. |defect| from the nearest integer is written to
/// *defect when given.
int winding_of_samples(const std::vector<Complex>& samples, double* defect = nullptr);

/// Applies Dirichlet data: copies samples onto the loop nodes and sets the mask.
void impose_boundary(ComplexField& u, const BoundaryData& g);

}  // namespace homogl
