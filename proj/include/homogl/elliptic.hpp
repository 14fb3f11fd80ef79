#pragma once

#include <memory>
#include <optional>

#include "homogl/fields.hpp"

namespace homogl {

enum class BC {
    periodic,                // both axes wrap
    dirichlet,               // boundary nodes fixed, operator passes them through
    neumann_x_periodic_y,    // natural (Neumann) in x, periodic in y (polar grids: x=r, y=theta)
};

/// Conservative discretization of f -> div(A grad f).
///
/// The discrete Dirichlet form integrates grad f . A grad f with the gradient of
/// the bilinear interpolant evaluated at the four corners of every cell (per-cell
/// trapezoidal quadrature, node matrices at the corners). The operator is the
/// exact transpose of that form: <Lf, g> = -q(f, g) in the volume-weighted inner
/// product, so it is symmetric, negative semidefinite, and sums to zero under
/// periodic boundary conditions. The diagonal part reduces to per-edge
/// coefficients equal to the arithmetic mean of the two adjacent node matrices;
/// the a12 part is the symmetric 9-point mixed stencil.
class DivAGradOperator {
  public:
    DivAGradOperator(std::shared_ptr<const MatrixField> A, BC bc);

    const Grid2D& grid() const { return A_->grid; }
    const MatrixField& matrix_field() const { return *A_; }
    BC bc() const { return bc_; }

    /// Arithmetic mean of the two node matrices adjacent to an edge.
    /// axis 0: edge (i,j)-(i+1,j); axis 1: edge (i,j)-(i,j+1).
    Mat2 edge_matrix(int axis, std::size_t i, std::size_t j) const;

    /// Lf at free nodes; Dirichlet nodes pass through untouched.
    ScalarField apply(const ScalarField& f) const;
    ComplexField apply(const ComplexField& f) const;

    /// div(A (grad f + xi)) for a constant gradient offset xi; the affine term's
    /// divergence has exactly zero discrete mean, which makes cell-problem and
    /// annulus right-hand sides compatible by construction.
    ScalarField apply_with_offset(const ScalarField& f, Vec2 xi) const;

    /// q(f) = discrete integral of (grad f + xi) . A (grad f + xi).
    double dirichlet_form(const ScalarField& f, Vec2 xi = {0.0, 0.0}) const;
    double dirichlet_form(const ComplexField& f) const;

    /// Mean flux (1/|Y|) integral of A (grad f + xi) over the grid, by the same
    /// corner quadrature as the form. Used to assemble homogenized matrices.
    Vec2 flux_mean(const ScalarField& f, Vec2 xi) const;

    /// Writes the energy-form row sums q(f, delta_n) into out (the gradient of
    /// 1/2 q(f,f) per node) and returns q(f+xi, f+xi) from the same sweep.
    /// Building block for apply, solve_cg and the GL solver.
    double accumulate_deposits(const ScalarField& f, Vec2 xi, std::vector<double>& out) const;
    double accumulate_deposits(const ComplexField& f, std::vector<Complex>& out) const;

    bool node_is_free(std::size_t i, std::size_t j) const {
        return bc_ != BC::dirichlet || !grid().on_boundary(i, j);
    }

  private:
    std::shared_ptr<const MatrixField> A_;
    BC bc_;
};

struct CGOptions {
    double tol = 1e-10;
    std::size_t max_iter = 50000;
    bool zero_mean = false;               // project the iterate every step
    const ScalarField* diag_precond = nullptr;  // optional inverse-diagonal hook
};

struct CGInfo {
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

/// Solves op(f) = rhs by conjugate gradients on the free nodes. For Dirichlet
/// problems the initial field supplies the boundary values (and the starting
/// guess); when absent the zero field is used. Throws SolveError if the residual
/// target is not met within max_iter, or if a zero-mean solve receives an rhs
/// whose mean exceeds tol * ||rhs||.
ScalarField solve_cg(const DivAGradOperator& op, const ScalarField& rhs,
                     const ScalarField* initial, const CGOptions& opt, CGInfo* info = nullptr);

/// Volume-weighted inner product and norm over all nodes.
double inner_vol(const Grid2D& g, const std::vector<double>& a, const std::vector<double>& b);
double norm_vol(const Grid2D& g, const std::vector<double>& a);

}  // namespace homogl
