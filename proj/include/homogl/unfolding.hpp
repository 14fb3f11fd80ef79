#pragma once

#include <functional>
#include <vector>

#include "homogl/cell_homog.hpp"
#include "homogl/fields.hpp"

namespace homogl {

/// T_delta f(x, y) = f(delta [x/delta] + delta y) on cells fully contained in
/// the domain; cells touching the boundary carry the zero extension and are
/// not stored. Micro samples sit at y = k/micro_n, k = 0..micro_n-1 per axis
/// (the half-open cell), so aligned grids (delta/h integer, micro_n = delta/h)
/// are sampled exactly at nodes.
struct UnfoldedField {
    struct Cell {
        long zx = 0, zy = 0;   // integer cell index, anchor = delta * (zx, zy)
        Vec2 anchor{};
        std::vector<Complex> values;  // micro_n * micro_n, row-major in y2
    };
    double delta = 0.0;
    std::size_t micro_n = 0;
    bool exact_samples = false;  // true when micro nodes coincide with grid nodes
    std::vector<Cell> cells;     // ordered by (zy, zx)

    /// sum over cells of delta^2 * mean |values|^2.
    double unfolded_mass() const;
};

UnfoldedField unfold(const ComplexField& f, double delta, std::size_t micro_n);

/// Closure-based unfolding over the rectangle of the given grid (exact samples,
/// no interpolation); used with analytic fields.
UnfoldedField unfold_closure(const Grid2D& domain, const std::function<Complex(Vec2)>& f,
                             double delta, std::size_t micro_n);

/// Discrete L2 mass of f over the union of the unfolded cells, summed node by
/// node with the same half-open membership as the cells.
double covered_mass(const ComplexField& f, const UnfoldedField& uf);

struct GradientIdentityReport {
    double defect_max = 0.0;
    double defect_l2 = 0.0;
    std::size_t cells = 0;
};

/// Defect of the implemented relation grad_y T_delta f = delta T_delta(grad f):
/// the y-gradient is finite-differenced on the micro grid, the right side
/// unfolds the given gradient. Analytic version.
GradientIdentityReport unfold_gradient_identity_check(const Grid2D& domain,
                                                      const std::function<Complex(Vec2)>& f,
                                                      const std::function<Complex(Vec2)>& dfx,
                                                      const std::function<Complex(Vec2)>& dfy,
                                                      double delta, std::size_t micro_n);

/// Discrete-field version: the macro gradient comes from central differences.
GradientIdentityReport unfold_gradient_identity_check(const ComplexField& f, double delta,
                                                      std::size_t micro_n);

/// Central-difference gradient fields (one-sided at non-periodic boundaries).
void discrete_gradient(const ComplexField& f, ComplexField& dfx, ComplexField& dfy);

struct TwoScaleCellFit {
    long zx = 0, zy = 0;
    Vec2 anchor{};
    Complex G1{}, G2{};        // constant (macro) gradient components
    Complex coeff1{}, coeff2{};  // corrector coefficients
    double residual = 0.0;     // l2 norm of the unexplained part
    double data_norm = 0.0;    // l2 norm of the unfolded gradient on the cell
    bool flagged = false;      // rank-deficient fit, excluded from aggregates
};

struct TwoScaleFit {
    double delta = 0.0;
    std::size_t micro_n = 0;
    std::vector<TwoScaleCellFit> cells;

    /// sqrt(sum residual^2 / sum data^2) over non-flagged cells whose anchor
    /// passes the filter (empty filter keeps everything).
    double relative_residual(const std::function<bool(Vec2)>& keep = {}) const;
};

/// Per-cell least-squares split of the unfolded gradient into a constant part
/// plus the span of the corrector gradients. The corrector basis is sampled at
/// the cell-solution nodes (micro_n equals the cell grid size).
TwoScaleFit extract_two_scale_pair(const ComplexField& u, double delta, const CellSolution& cell);

}  // namespace homogl
