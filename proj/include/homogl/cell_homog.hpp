#pragma once

#include <memory>
#include <vector>

#include "homogl/elliptic.hpp"

namespace homogl {

/// Correctors on the periodic unit cell plus the homogenized matrix assembled
/// from them.
struct CellSolution {
    std::shared_ptr<const MatrixField> A;   // the sampled periodic cell field
    ScalarField chi1, chi2;                 // zero-mean correctors
    Mat2 A0;                                // symmetrized homogenized matrix
    double asym_defect = 0.0;               // |A0_12 - A0_21| before symmetrization
    double residual1 = 0.0, residual2 = 0.0;  // relative solver residuals
    double mean1 = 0.0, mean2 = 0.0;          // corrector means (should be ~0)
};

/// Solves div A grad chi_j = div(A e_j) on the periodic cell: the rhs is the
/// discrete divergence of the column A e_j through the same conservative form
/// as the operator, so it has exactly zero discrete mean.
CellSolution solve_cell_problem(std::shared_ptr<const MatrixField> A, double tol);

/// A0_ij = mean of e_i . A (e_j - grad chi_j), symmetrized; throws if the
/// asymmetry defect exceeds 1e-6.
Mat2 assemble_A0(const DivAGradOperator& op, const ScalarField& chi1, const ScalarField& chi2,
                 double* asym_defect = nullptr);

struct LinearParadigmReport {
    std::vector<double> deltas;
    std::vector<double> gaps;       // ||U_delta - U0||_L2
    bool decreasing = false;
    Mat2 A0;
};

/// The classical linear homogenization check: -div(A(x/delta) grad U) = f with
/// U = 0 on the boundary of [-1,1]^2, against the A0 problem. Every delta must
/// resolve at least min_nodes_per_period grid nodes per period.
LinearParadigmReport validate_linear_paradigm(const Material& mat, double source_value,
                                              const std::vector<double>& deltas,
                                              std::size_t domain_n, std::size_t cell_n,
                                              double tol, double min_nodes_per_period = 8.0);

}  // namespace homogl
