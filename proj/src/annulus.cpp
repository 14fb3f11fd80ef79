#include "homogl/annulus.hpp"

#include <algorithm>
#include <cmath>

namespace homogl {

namespace {

std::shared_ptr<const MatrixField> polar_field(const Material& B, const PolarGrid& pg) {
    return std::make_shared<MatrixField>(sample_polar_matrix(B, pg));
}

/// Solves the lifted Euler-Lagrange system div(Btilde (grad h + kappa e_theta)) = 0
/// and returns the zero-mean h plus solver info.
ScalarField solve_lift(const DivAGradOperator& op, int kappa, double tol, double* rel_residual) {
    const Grid2D& g = op.grid();
    const ScalarField zero(g);
    const Vec2 xi{0.0, double(kappa)};
    ScalarField rhs = op.apply_with_offset(zero, xi);
    for (double& x : rhs.v) x = -x;  // L h = -div(Btilde xi)
    // a numerically zero forcing (constant-coefficient fields up to round-off)
    // has the pure angle map as exact minimizer
    if (norm_vol(g, rhs.v) <= 1e-12 * std::abs(double(kappa)) * op.matrix_field().M) {
        if (rel_residual) *rel_residual = 0.0;
        return ScalarField(g);
    }
    CGOptions opt;
    opt.tol = tol;
    opt.zero_mean = true;
    CGInfo info;
    ScalarField h = solve_cg(op, rhs, nullptr, opt, &info);
    if (rel_residual) *rel_residual = info.rel_residual;
    return h;
}

/// Defect of the natural boundary condition at r = alpha, beta: the conormal
/// flux (Btilde Df) . e_r, measured with one-sided radial differences. For
/// isotropic fields this reduces to the pure radial derivative of the lift.
double one_sided_neumann_defect(const PolarGrid& pg, const MatrixField& Bt, const ScalarField& h,
                                int kappa) {
    const Grid2D& g = pg.grid;
    double defect = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) {
        const std::size_t jp = (j + 1) % g.ny, jm = (j + g.ny - 1) % g.ny;
        const std::size_t edges[2] = {0, g.nx - 1};
        for (int e = 0; e < 2; ++e) {
            const std::size_t i = edges[e];
            const double hs = e == 0 ? (h.at(1, j) - h.at(0, j)) / g.hx
                                     : (h.at(i, j) - h.at(i - 1, j)) / g.hx;
            const double ft = double(kappa) + (h.at(i, jp) - h.at(i, jm)) / (2.0 * g.hy);
            const Mat2 b = Bt.at(i, j);
            const double r = pg.r(i);
            defect = std::max(defect, std::abs(b.a11 * hs + b.a12 * ft) / r);
        }
    }
    return defect;
}

}  // namespace

PolarGrid PolarGrid::make(double alpha, double beta, std::size_t nr, std::size_t ntheta) {
    if (!(0.0 < alpha && alpha < beta)) throw Error("PolarGrid: need 0 < alpha < beta");
    if (ntheta < 16) throw Error("PolarGrid: ntheta must be at least 16");
    if (nr < 3) throw Error("PolarGrid: nr must be at least 3");
    PolarGrid pg;
    pg.nr = nr;
    pg.ntheta = ntheta;
    pg.alpha = alpha;
    pg.beta = beta;
    const double span = std::log(beta / alpha);
    pg.grid = Grid2D(nr, ntheta, Vec2{0.0, 0.0}, span / double(nr - 1),
                     2.0 * M_PI / double(ntheta), false, true);
    return pg;
}

MatrixField sample_polar_matrix(const Material& B, const PolarGrid& pg) {
    MatrixField F(pg.grid, B.m, B.M);
    const double tol = 1e-12;
    for (std::size_t j = 0; j < pg.ntheta; ++j) {
        const double th = pg.theta(j);
        const double c = std::cos(th), s = std::sin(th);
        for (std::size_t i = 0; i < pg.nr; ++i) {
            const double r = pg.r(i);
            const Mat2 a = B.A(Vec2{r * c, r * s});
            if (a.eig_min() < B.m - tol || a.eig_max() > B.M + tol)
                throw Error("sample_polar_matrix: eigenvalue outside [m, M]");
            // frame (e_r, e_theta): Btilde = R^T a R with R = [e_r | e_theta]
            const Vec2 er{c, s}, et{-s, c};
            const Vec2 aer = a.apply(er), aet = a.apply(et);
            F.set(i, j, Mat2{dot(er, aer), dot(er, aet), dot(et, aet)});
        }
    }
    return F;
}

double lift_energy(const Material& B, const LiftedMap& lift) {
    DivAGradOperator op(polar_field(B, lift.polar), BC::neumann_x_periodic_y);
    return op.dirichlet_form(lift.h, Vec2{0.0, double(lift.kappa)});
}

MuResult compute_mu(const Material& B, double alpha, double beta, int kappa, std::size_t nr,
                    std::size_t ntheta, double tol) {
    if (!(tol > 0.0)) throw Error("compute_mu: tol must be positive");
    const PolarGrid pg = PolarGrid::make(alpha, beta, nr, ntheta);
    DivAGradOperator op(polar_field(B, pg), BC::neumann_x_periodic_y);

    MuResult out;
    out.lift.polar = pg;
    out.lift.kappa = kappa;
    if (kappa == 0) {
        out.lift.h = ScalarField(pg.grid);
        out.mu = 0.0;
        out.residual = 0.0;
    } else {
        out.lift.h = solve_lift(op, kappa, tol, &out.residual);
        out.mu = op.dirichlet_form(out.lift.h, Vec2{0.0, double(kappa)});
    }
    out.neumann_defect =
        kappa == 0 ? 0.0 : one_sided_neumann_defect(pg, op.matrix_field(), out.lift.h, kappa);

    const double logba = std::log(beta / alpha);
    out.lower = 2.0 * B.m * M_PI * double(kappa) * double(kappa) * logba;
    out.upper = 2.0 * B.M * M_PI * double(kappa) * double(kappa) * logba;
    const double slack = 1e-9 * (out.upper + 1.0) + 1e-6 * std::abs(out.mu);
    if (out.mu < out.lower - slack || out.mu > out.upper + slack)
        throw SolveError("compute_mu: Lemma-style log bracket violated, solver inconsistency", out.mu);
    return out;
}

std::vector<KappaScalingRow> kappa_scaling_check(const Material& B, double alpha, double beta,
                                                 const std::vector<int>& kappas, std::size_t nr,
                                                 std::size_t ntheta, double tol) {
    if (kappas.size() < 2) throw Error("kappa_scaling_check: need at least 2 kappa values");
    const double mu1 = compute_mu(B, alpha, beta, 1, nr, ntheta, tol).mu;
    std::vector<KappaScalingRow> rows;
    for (int k : kappas) {
        KappaScalingRow row;
        row.kappa = k;
        row.mu = compute_mu(B, alpha, beta, k, nr, ntheta, tol).mu;
        const double k2 = double(k) * double(k);
        row.ratio_defect = k == 0 ? std::abs(row.mu) : std::abs(row.mu / mu1 - k2) / k2;
        rows.push_back(row);
    }
    return rows;
}

CompetitorResult build_boundary_competitor(const Material& B, double alpha, double beta, int kappa,
                                           std::size_t nr, std::size_t ntheta, double tol) {
    CompetitorResult out;
    const PolarGrid pg = PolarGrid::make(alpha, beta, nr, ntheta);
    out.lift.polar = pg;
    out.lift.kappa = kappa;
    out.lift.h = ScalarField(pg.grid);

    if (beta <= 4.0 * alpha) {
        // solved by the pure angle map
        out.trivial_case = true;
        out.theta0 = 0.0;
        out.energy = lift_energy(B, out.lift);
        out.mu = compute_mu(B, alpha, beta, kappa, nr, ntheta, tol).mu;
        out.excess = out.energy - out.mu;
        return out;
    }

    // inner minimizer for kappa = 1 on (2 alpha, beta / 2); a general kappa is
    // the kappa-th power of the kappa = 1 construction
    const MuResult inner = compute_mu(B, 2.0 * alpha, beta / 2.0, 1, nr, ntheta, tol);
    const PolarGrid& ipg = inner.lift.polar;
    ScalarField h1 = inner.lift.h;

    // J: rings where the minimizer's angular energy is at most the pure-angle one
    const MatrixField Bt = sample_polar_matrix(B, ipg);
    std::vector<std::size_t> J;
    for (std::size_t i = 0; i < ipg.nr; ++i) {
        double S = 0.0, T = 0.0;
        for (std::size_t j = 0; j < ipg.ntheta; ++j) {
            const std::size_t jp = (j + 1) % ipg.ntheta, jm = (j + ipg.ntheta - 1) % ipg.ntheta;
            double hs;
            if (i == 0) hs = (h1.at(1, j) - h1.at(0, j)) / ipg.grid.hx;
            else if (i + 1 == ipg.nr) hs = (h1.at(i, j) - h1.at(i - 1, j)) / ipg.grid.hx;
            else hs = (h1.at(i + 1, j) - h1.at(i - 1, j)) / (2.0 * ipg.grid.hx);
            const double ft = 1.0 + (h1.at(i, jp) - h1.at(i, jm)) / (2.0 * ipg.grid.hy);
            const Mat2 b = Bt.at(i, j);
            S += b.a11 * hs * hs + 2.0 * b.a12 * hs * ft + b.a22 * ft * ft;
            T += b.a22;
        }
        if (S <= T * (1.0 + 1e-12) + 1e-14) J.push_back(i);
    }
    if (J.empty())
        throw Error("build_boundary_competitor: the radius set J is empty, "
                    "which contradicts the construction");

    const std::size_t i1 = J.front(), i2 = J.back();
    const double r1 = ipg.r(i1), r2 = ipg.r(i2);
    out.r1 = r1;
    out.r2 = r2;

    // normalize f1(r2, 0) = 0, then theta0 = f1(r1, 0)
    const double norm_c = h1.at(i2, 0);
    for (double& x : h1.v) x -= norm_c;
    const double theta0 = h1.at(i1, 0);
    out.theta0 = theta0;

    // residual part of f1 (= f1 - theta) at an arbitrary radius, linear in s
    const double s_inner0 = std::log(2.0 * alpha / alpha);  // inner grid offset in s of the outer grid
    auto h1_at = [&](double r, std::size_t j) {
        double si = (std::log(r / (2.0 * alpha))) / ipg.grid.hx;
        si = std::clamp(si, double(i1), double(i2));
        const std::size_t i = std::min(std::size_t(si), ipg.nr - 2);
        const double a = si - double(i);
        return (1.0 - a) * h1.at(i, j) + a * h1.at(i + 1, j);
    };
    (void)s_inner0;

    // five branches, stored as the residual lift (f - kappa theta)
    double seam = 0.0;
    for (std::size_t j = 0; j < pg.ntheta; ++j) {
        const double h1_r1 = h1.at(i1, j), h1_r2 = h1.at(i2, j);
        for (std::size_t i = 0; i < pg.nr; ++i) {
            const double r = pg.r(i);
            double res;
            if (r >= 2.0 * r2) res = 0.0;
            else if (r >= r2) {
                const double lam = (r - r2) / r2;  // 0 at r2, 1 at 2 r2
                res = (1.0 - lam) * h1_r2;
            } else if (r >= r1) res = h1_at(r, j);
            else if (r >= 0.5 * r1) {
                const double lam = (2.0 * r - r1) / r1;  // 0 at r1/2, 1 at r1
                res = lam * h1_r1 + (1.0 - lam) * theta0;
            } else res = theta0;
            out.lift.h.at(i, j) = double(kappa) * res;
        }
        // seam continuity of the branch formulas at the four joining radii
        seam = std::max(seam, std::abs((1.0 - 0.0) * h1_r2 - h1_at(r2, j)));          // r = r2
        seam = std::max(seam, std::abs(h1_at(r1, j) - (1.0 * h1_r1 + 0.0 * theta0)));  // r = r1
    }
    out.seam_defect = seam;
    const double seam_tol = 1e-10 * (1.0 + std::abs(theta0) + std::abs(norm_c));
    if (seam > seam_tol)
        throw Error("build_boundary_competitor: branch mismatch at a seam radius: " +
                    std::to_string(seam));

    out.energy = lift_energy(B, out.lift);
    out.mu = compute_mu(B, alpha, beta, kappa, nr, ntheta, tol).mu;
    out.excess = out.energy - out.mu;
    return out;
}

}  // namespace homogl
