#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "homogl/elliptic.hpp"

namespace homogl {

/// Discrete Ginzburg-Landau problem on the square domain:
/// E(u) = 1/2 int grad u . A_delta grad u + 1/(4 eps^2) int (1 - |u|^2)^2,
/// Dirichlet data g of prescribed degree.
struct GLProblem {
    Grid2D grid;
    std::shared_ptr<const MatrixField> A_delta;
    double epsilon = 0.0;
    double delta = 0.0;
    BoundaryData g;
};

GLProblem make_gl_problem(const Material& mat, std::size_t domain_n, double delta, double epsilon,
                          int degree);

struct EnergyParts {
    double total = 0.0;
    double dirichlet = 0.0;
    double potential = 0.0;
};

/// Trapezoidal quadrature of both energy terms; total = sum of parts.
EnergyParts gl_energy(const GLProblem& p, const ComplexField& u);

struct MinimizeResult {
    ComplexField u;
    double energy = 0.0;
    double dirichlet_part = 0.0;
    double potential_part = 0.0;
    double el_residual = 0.0;   // sup of the Euler-Lagrange residual (energy gradient / node volume)
    std::size_t iterations = 0;
    /// (1/eps^2) int (1-|u|^2)^2, the quantity the epsilon-selection rule bounds.
    double potential_term() const { return 4.0 * potential_part; }
};

struct StepControl {
    enum class Kind { bb, fixed } kind = Kind::bb;  // Barzilai-Borwein or fixed initial step
    double t0 = 0.0;                                // 0: automatic from (M, h, eps)
    double t_min_factor = 1e-12;                    // step collapse threshold relative to t0
    double armijo = 1e-4;
    double backtrack = 0.5;
};

struct MinimizeOptions {
    double tol_grad = 1e-9;       // energy-gradient sup-norm target
    std::size_t max_iter = 200000;
    StepControl step;
};

class MinimizeError : public SolveError {
  public:
    MinimizeError(const std::string& what, double residual, std::shared_ptr<MinimizeResult> last)
        : SolveError(what, residual), last_(std::move(last)) {}
    const MinimizeResult& last_iterate() const { return *last_; }

  private:
    std::shared_ptr<MinimizeResult> last_;
};

/// Projected gradient descent with backtracking line search. The projection
/// clips |u| <= 1 nodewise each accepted step; energy is non-increasing across
/// accepted steps. Terminates when the energy-gradient sup-norm over free nodes
/// drops below tol_grad. Throws MinimizeError (with the last iterate) on step
/// collapse or iteration exhaustion.
MinimizeResult minimize(const GLProblem& p, const ComplexField* seed, const MinimizeOptions& opt);

/// Coarse-to-fine wrapper: solves on a chain of dyadically coarsened grids and
/// prolongates, then polishes on the target grid. tol_el is the Euler-Lagrange
/// residual target (tol_grad = tol_el * h^2 per level).
MinimizeResult minimize_multilevel(const Material& mat, std::size_t domain_n, double delta,
                                   double epsilon, int degree, double tol_el,
                                   const MinimizeOptions& base = {});

/// Default seed: (z/|z|)^d about the domain center with modulus ramp r/epsilon
/// inside radius epsilon.
ComplexField gl_seed(const GLProblem& p);

struct SlopeReport {
    double slope = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool within = false;
};

/// Least-squares slope of energy against log(1/eps); the Lemma 2.2-style
/// contract band is [m pi d (1-theta), M pi d (1+theta)]. Refuses runs whose
/// epsilon is not resolved (eps < floor * h).
SlopeReport energy_bound_check(const std::vector<std::pair<double, double>>& eps_energy, double m,
                               double M, int degree, double h, double theta = 0.15,
                               double resolution_floor = 4.0);

struct EpsilonCase {
    double delta = 0.0;
    std::size_t grid_n = 0;
    std::vector<double> candidates;
    std::size_t lemma_index = 0;  // 1-based n in eps < delta^2/n; 0: position in the list
};

struct EpsilonSelection {
    double delta = 0.0;
    double epsilon = 0.0;
    double potential_term = 0.0;   // measured (1/eps^2) int (1-|u|^2)^2
    std::vector<double> rejected_precondition;  // candidates violating eps < delta^2/n or eps >= 4h
    MinimizeResult result;
};

/// Lemma-2.3 selection: for the n-th case returns the largest candidate whose
/// minimizer satisfies (1/eps^2) int (1-|u|^2)^2 <= 4 M pi d. Candidates
/// violating eps < delta_n^2 / n or eps >= 4h are rejected before solving.
std::vector<EpsilonSelection> select_epsilon(const Material& mat, int degree,
                                             const std::vector<EpsilonCase>& cases, double tol_el);

}  // namespace homogl
