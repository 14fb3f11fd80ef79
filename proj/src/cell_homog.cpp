#include "homogl/cell_homog.hpp"

#include <algorithm>
#include <cmath>

namespace homogl {

namespace {

/// One corrector: solve L chi = div(A e_j), zero mean.
ScalarField solve_corrector(const DivAGradOperator& op, Vec2 ej, double tol, double* rel_residual) {
    const Grid2D& g = op.grid();
    const ScalarField zero(g);
    ScalarField rhs = op.apply_with_offset(zero, ej);
    CGOptions opt;
    opt.tol = tol;
    opt.zero_mean = true;
    CGInfo info;
    ScalarField chi = solve_cg(op, rhs, nullptr, opt, &info);
    if (rel_residual) *rel_residual = info.rel_residual;
    return chi;
}

double field_mean(const ScalarField& f) {
    double s = 0.0, vol = 0.0;
    for (std::size_t j = 0; j < f.grid.ny; ++j)
        for (std::size_t i = 0; i < f.grid.nx; ++i) {
            s += f.at(i, j) * f.grid.node_volume(i, j);
            vol += f.grid.node_volume(i, j);
        }
    return s / vol;
}

}  // namespace

Mat2 assemble_A0(const DivAGradOperator& op, const ScalarField& chi1, const ScalarField& chi2,
                 double* asym_defect) {
    // column j of the raw matrix: mean of A (e_j - grad chi_j)
    ScalarField neg1 = chi1, neg2 = chi2;
    for (double& x : neg1.v) x = -x;
    for (double& x : neg2.v) x = -x;
    const Vec2 col1 = op.flux_mean(neg1, Vec2{1.0, 0.0});
    const Vec2 col2 = op.flux_mean(neg2, Vec2{0.0, 1.0});
    const double defect = std::abs(col1.y - col2.x);
    if (asym_defect) *asym_defect = defect;
    if (defect > 1e-6)
        throw Error("assemble_A0: asymmetry defect " + std::to_string(defect) +
                    " signals an inconsistent corrector");
    return {col1.x, 0.5 * (col1.y + col2.x), col2.y};
}

CellSolution solve_cell_problem(std::shared_ptr<const MatrixField> A, double tol) {
    if (!(tol > 0.0)) throw Error("solve_cell_problem: tol must be positive");
    DivAGradOperator op(A, BC::periodic);
    CellSolution cs;
    cs.A = A;
    cs.chi1 = solve_corrector(op, Vec2{1.0, 0.0}, tol, &cs.residual1);
    cs.chi2 = solve_corrector(op, Vec2{0.0, 1.0}, tol, &cs.residual2);
    cs.mean1 = field_mean(cs.chi1);
    cs.mean2 = field_mean(cs.chi2);
    cs.A0 = assemble_A0(op, cs.chi1, cs.chi2, &cs.asym_defect);
    return cs;
}

LinearParadigmReport validate_linear_paradigm(const Material& mat, double source_value,
                                              const std::vector<double>& deltas,
                                              std::size_t domain_n, std::size_t cell_n,
                                              double tol, double min_nodes_per_period) {
    if (deltas.empty()) throw Error("validate_linear_paradigm: empty delta list");
    const Grid2D g = Grid2D::domain_square(domain_n);
    for (double d : deltas)
        if (d / g.hx < min_nodes_per_period)
            throw Error("validate_linear_paradigm: delta " + std::to_string(d) +
                        " resolves fewer than " + std::to_string(min_nodes_per_period) +
                        " nodes per period");

    ScalarField rhs(g);
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
        for (std::size_t i = 1; i + 1 < g.nx; ++i) rhs.at(i, j) = -source_value;  // -div(A grad U) = f

    CGOptions opt;
    opt.tol = tol;

    auto solve_with = [&](std::shared_ptr<const MatrixField> A) {
        DivAGradOperator op(A, BC::dirichlet);
        return solve_cg(op, rhs, nullptr, opt, nullptr);
    };

    LinearParadigmReport rep;

    // homogenized reference
    const auto cellA = std::make_shared<MatrixField>(
        sample_matrix_field(mat, Grid2D::unit_cell(cell_n)));
    const CellSolution cs = solve_cell_problem(cellA, tol);
    rep.A0 = cs.A0;
    Material hom;
    hom.name = "A0";
    hom.m = std::min(cs.A0.eig_min(), mat.m);
    hom.M = std::max(cs.A0.eig_max(), mat.M);
    const Mat2 A0 = cs.A0;
    hom.A = [A0](Vec2) { return A0; };
    const ScalarField U0 = solve_with(std::make_shared<MatrixField>(sample_matrix_field(hom, g)));

    for (double d : deltas) {
        const ScalarField Ud =
            solve_with(std::make_shared<MatrixField>(sample_matrix_field(mat, g, d)));
        std::vector<double> diff(Ud.v.size());
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = Ud.v[k] - U0.v[k];
        rep.deltas.push_back(d);
        rep.gaps.push_back(norm_vol(g, diff));
    }
    rep.decreasing = true;
    for (std::size_t k = 1; k < rep.gaps.size(); ++k)
        if (!(rep.gaps[k] < rep.gaps[k - 1])) rep.decreasing = false;
    return rep;
}

}  // namespace homogl
