#pragma once

#include <vector>

#include "homogl/elliptic.hpp"

namespace homogl {

/// Annulus alpha <= |x| <= beta discretized in (s, theta) with s = log(r/alpha)
/// uniformly spaced (so pure-angle maps have exact per-ring energy) and theta
/// periodic. In these coordinates the weighted form
///   int Df . Btilde Df r dr dtheta
/// becomes a plain variable-coefficient Dirichlet form on the rectangle.
struct PolarGrid {
    std::size_t nr = 0, ntheta = 0;
    double alpha = 0.0, beta = 0.0;
    Grid2D grid;  // x: s in [0, log(beta/alpha)] bounded, y: theta periodic

    static PolarGrid make(double alpha, double beta, std::size_t nr, std::size_t ntheta);

    double r(std::size_t i) const { return alpha * std::exp(grid.x(i)); }
    double theta(std::size_t j) const { return grid.y(j); }
};

/// B(x) sampled at polar nodes and rotated into the (e_r, e_theta) frame.
MatrixField sample_polar_matrix(const Material& B, const PolarGrid& pg);

/// S1-valued map of degree kappa through its lift f(r,theta) = kappa theta + h,
/// with h single-valued on the periodic-theta grid (this encodes
/// f(r, 2pi) = f(r, 0) + 2 kappa pi exactly).
struct LiftedMap {
    PolarGrid polar;
    ScalarField h;
    int kappa = 0;

    double f(std::size_t i, std::size_t j) const {
        return double(kappa) * polar.theta(j) + h.at(i, j);
    }
};

struct MuResult {
    double mu = 0.0;
    LiftedMap lift;
    double neumann_defect = 0.0;  // max |df/dr| at r = alpha, beta (one-sided)
    double residual = 0.0;        // CG relative residual
    double lower = 0.0, upper = 0.0;  // 2 m pi k^2 log(b/a), 2 M pi k^2 log(b/a)
};

/// Minimal B-weighted Dirichlet energy over degree-kappa S1 maps on the
/// annulus: CG on the lifted Euler-Lagrange system with natural (Neumann)
/// conditions at the radii and theta-periodicity. Errors if the solver fails or
/// the classical log bracket is violated beyond tolerance.
MuResult compute_mu(const Material& B, double alpha, double beta, int kappa, std::size_t nr,
                    std::size_t ntheta, double tol);

/// Energy of a lifted map in the B-weighted form (same quadrature as compute_mu).
double lift_energy(const Material& B, const LiftedMap& lift);

struct KappaScalingRow {
    int kappa = 0;
    double mu = 0.0;
    double ratio_defect = 0.0;  // |mu(k)/mu(1) - k^2| / k^2
};

std::vector<KappaScalingRow> kappa_scaling_check(const Material& B, double alpha, double beta,
                                                 const std::vector<int>& kappas, std::size_t nr,
                                                 std::size_t ntheta, double tol);

struct CompetitorResult {
    LiftedMap lift;       // on the (alpha, beta) grid
    double energy = 0.0;  // measured B-weighted energy of the competitor
    double mu = 0.0;      // mu(B, alpha, beta, kappa) on the same grid
    double excess = 0.0;  // energy - mu
    double theta0 = 0.0;
    double r1 = 0.0, r2 = 0.0;  // inf J, sup J (grid radii of the inner solve)
    double seam_defect = 0.0;
    bool trivial_case = false;  // beta <= 4 alpha: pure angle map
};

/// Prescribed-boundary competitor: inner minimizer on (2 alpha, beta/2), the
/// radius set J, and the five-branch interpolation. Boundary traces are exactly
/// kappa*theta (outer) and kappa*(theta + theta0) (inner) at nodes.
CompetitorResult build_boundary_competitor(const Material& B, double alpha, double beta, int kappa,
                                           std::size_t nr, std::size_t ntheta, double tol);

}  // namespace homogl
