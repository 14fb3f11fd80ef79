#include "homogl/gl_solver.hpp"

#include <algorithm>
#include <cmath>

#include "homogl/parallel.hpp"

namespace homogl {

namespace {

Vec2 domain_center(const Grid2D& g) {
    return {g.origin.x + 0.5 * double(g.nx - 1) * g.hx, g.origin.y + 0.5 * double(g.ny - 1) * g.hy};
}

void check_problem(const GLProblem& p, const ComplexField& u) {
    if (!u.grid.same_layout(p.grid)) throw Error("gl_solver: field lives on a different grid");
}

/// Potential energy and (optionally) its gradient contribution added onto grad.
double potential_pass(const GLProblem& p, const ComplexField& u, std::vector<Complex>* grad) {
    const Grid2D& g = p.grid;
    const double c = 1.0 / (4.0 * p.epsilon * p.epsilon);
    const double ge = 1.0 / (p.epsilon * p.epsilon);
    return parallel_sum(g.ny, 16, [&](std::size_t j0, std::size_t j1) {
        double s = 0.0;
        for (std::size_t j = j0; j < j1; ++j)
            for (std::size_t i = 0; i < g.nx; ++i) {
                const std::size_t k = g.idx(i, j);
                const double vol = g.node_volume(i, j);
                const Complex z = u.v[k];
                const double q = 1.0 - (z.real() * z.real() + z.imag() * z.imag());
                s += c * vol * q * q;
                if (grad && !u.boundary_mask[k]) (*grad)[k] -= (ge * vol * q) * z;
            }
        return s;
    });
}

struct FusedEval {
    EnergyParts parts;
    double grad_sup = 0.0;
};

/// Energy and its gradient in one sweep. grad holds dE/du per node, zeroed at
/// Dirichlet nodes.
FusedEval fused_energy_gradient(const GLProblem& p, const DivAGradOperator& op,
                                const ComplexField& u, std::vector<Complex>& grad) {
    FusedEval out;
    // deposits are exactly dE_dirichlet/du; the same sweep returns the form
    out.parts.dirichlet = 0.5 * op.accumulate_deposits(u, grad);
    for (std::size_t k = 0; k < grad.size(); ++k)
        if (u.boundary_mask[k]) grad[k] = Complex(0.0, 0.0);
    out.parts.potential = potential_pass(p, u, &grad);
    out.parts.total = out.parts.dirichlet + out.parts.potential;
    double sup = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k)
        sup = std::max(sup, std::max(std::abs(grad[k].real()), std::abs(grad[k].imag())));
    out.grad_sup = sup;
    return out;
}

}  // namespace

GLProblem make_gl_problem(const Material& mat, std::size_t domain_n, double delta, double epsilon,
                          int degree) {
    if (!(epsilon > 0.0) || !(delta > 0.0)) throw Error("make_gl_problem: need epsilon, delta > 0");
    GLProblem p;
    p.grid = Grid2D::domain_square(domain_n);
    p.A_delta = std::make_shared<MatrixField>(sample_matrix_field(mat, p.grid, delta));
    p.epsilon = epsilon;
    p.delta = delta;
    p.g = make_boundary_degree_d(p.grid, degree, domain_center(p.grid));
    return p;
}

EnergyParts gl_energy(const GLProblem& p, const ComplexField& u) {
    check_problem(p, u);
    DivAGradOperator op(p.A_delta, BC::dirichlet);
    EnergyParts e;
    e.dirichlet = 0.5 * op.dirichlet_form(u);
    e.potential = potential_pass(p, u, nullptr);
    e.total = e.dirichlet + e.potential;
    return e;
}

ComplexField gl_seed(const GLProblem& p) {
    ComplexField u(p.grid, Complex(1.0, 0.0));
    const Vec2 c = domain_center(p.grid);
    const int d = p.g.degree;
    for (std::size_t j = 0; j < p.grid.ny; ++j)
        for (std::size_t i = 0; i < p.grid.nx; ++i) {
            const Vec2 z = p.grid.node(i, j) - c;
            const double r = norm(z);
            if (r == 0.0) {
                u.at(i, j) = Complex(0.0, 0.0);
                continue;
            }
            const double th = std::atan2(z.y, z.x);
            const double ramp = std::min(1.0, r / p.epsilon);
            u.at(i, j) = ramp * Complex(std::cos(d * th), std::sin(d * th));
        }
    impose_boundary(u, p.g);
    return u;
}

MinimizeResult minimize(const GLProblem& p, const ComplexField* seed, const MinimizeOptions& opt) {
    if (!(opt.tol_grad > 0.0)) throw Error("minimize: tol_grad must be positive");
    ComplexField u = seed ? *seed : gl_seed(p);
    check_problem(p, u);
    impose_boundary(u, p.g);
    DivAGradOperator op(p.A_delta, BC::dirichlet);

    const Grid2D& g = p.grid;
    const std::size_t n = g.size();
    const double vol_int = g.hx * g.hy;

    // automatic step scale: inverse of the Hessian bound vol*(8M/h^2 + 2/eps^2)
    const double M = p.A_delta->M;
    const double t_auto = 1.0 / (vol_int * (8.0 * M / (g.hx * g.hx) + 2.0 / (p.epsilon * p.epsilon)));
    const double t0 = opt.step.t0 > 0.0 ? opt.step.t0 : t_auto;
    const double t_floor = t0 * opt.step.t_min_factor;

    std::vector<Complex> grad, grad_new;
    FusedEval cur = fused_energy_gradient(p, op, u, grad);

    auto make_result = [&](std::size_t iters) {
        MinimizeResult r;
        r.u = u;
        r.energy = cur.parts.total;
        r.dirichlet_part = cur.parts.dirichlet;
        r.potential_part = cur.parts.potential;
        r.el_residual = cur.grad_sup / vol_int;
        r.iterations = iters;
        return r;
    };

    double t = t0;
    ComplexField trial(g);
    trial.boundary_mask = u.boundary_mask;

    // once the per-step decrease drops under the round-off noise of the energy
    // sum, the line search can no longer discriminate; treat a long bitwise
    // energy plateau as a stall instead of spinning to max_iter
    double plateau_energy = cur.parts.total;
    std::size_t plateau_len = 0;
    const std::size_t plateau_cap = 300;

    std::size_t it = 0;
    for (; it < opt.max_iter; ++it) {
        if (cur.grad_sup <= opt.tol_grad) return make_result(it);
        if (plateau_len >= plateau_cap) {
            auto last = std::make_shared<MinimizeResult>(make_result(it));
            throw MinimizeError(
                "minimize: stalled at the round-off floor of the energy (gradient target too tight)",
                cur.grad_sup / vol_int, last);
        }

        double t_try = t;
        bool accepted = false;
        for (; t_try >= t_floor; t_try *= opt.step.backtrack) {
            // projected trial point and its squared distance from u
            double dist2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                Complex z = u.v[k] - t_try * grad[k];
                const double m2 = z.real() * z.real() + z.imag() * z.imag();
                if (m2 > 1.0) z /= std::sqrt(m2);
                trial.v[k] = z;
                const Complex dz = z - u.v[k];
                dist2 += dz.real() * dz.real() + dz.imag() * dz.imag();
            }
            if (dist2 == 0.0) break;  // step too small to move: treat as collapse
            FusedEval next = fused_energy_gradient(p, op, trial, grad_new);
            if (next.parts.total <= cur.parts.total - opt.step.armijo * dist2 / t_try) {
                // accepted: Barzilai-Borwein step from (s, y)
                if (opt.step.kind == StepControl::Kind::bb) {
                    double sy = 0.0;
                    for (std::size_t k = 0; k < n; ++k) {
                        const Complex s = trial.v[k] - u.v[k];
                        const Complex y = grad_new[k] - grad[k];
                        sy += s.real() * y.real() + s.imag() * y.imag();
                    }
                    t = sy > 0.0 ? std::clamp(dist2 / sy, 1e-3 * t_auto, 1e6 * t_auto)
                                 : std::min(2.0 * t_try, 1e6 * t_auto);
                } else {
                    t = t0;
                }
                u.v.swap(trial.v);
                grad.swap(grad_new);
                cur = next;
                if (cur.parts.total == plateau_energy) {
                    ++plateau_len;
                } else {
                    plateau_energy = cur.parts.total;
                    plateau_len = 0;
                }
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            auto last = std::make_shared<MinimizeResult>(make_result(it));
            throw MinimizeError("minimize: line search step collapse", cur.grad_sup / vol_int, last);
        }
    }
    if (cur.grad_sup <= opt.tol_grad) return make_result(it);
    auto last = std::make_shared<MinimizeResult>(make_result(it));
    throw MinimizeError("minimize: iteration budget exhausted", cur.grad_sup / vol_int, last);
}

namespace {

/// Bilinear prolongation coarse (n+1)/2 -> fine n, boundary values re-imposed later.
ComplexField prolongate(const ComplexField& coarse, const Grid2D& fine) {
    ComplexField f(fine);
    const Grid2D& cg = coarse.grid;
    for (std::size_t j = 0; j < fine.ny; ++j)
        for (std::size_t i = 0; i < fine.nx; ++i) {
            const std::size_t ic = i / 2, jc = j / 2;
            const bool ei = (i % 2) == 0, ej = (j % 2) == 0;
            Complex z;
            if (ei && ej) z = coarse.at(ic, jc);
            else if (!ei && ej) z = 0.5 * (coarse.at(ic, jc) + coarse.at(ic + 1, jc));
            else if (ei && !ej) z = 0.5 * (coarse.at(ic, jc) + coarse.at(ic, jc + 1));
            else
                z = 0.25 * (coarse.at(ic, jc) + coarse.at(ic + 1, jc) + coarse.at(ic, jc + 1) +
                            coarse.at(ic + 1, jc + 1));
            f.at(i, j) = z;
        }
    (void)cg;
    return f;
}

}  // namespace

MinimizeResult minimize_multilevel(const Material& mat, std::size_t domain_n, double delta,
                                   double epsilon, int degree, double tol_el,
                                   const MinimizeOptions& base) {
    // coarsen while the grid halves cleanly and the vortex core stays resolved
    std::vector<std::size_t> sizes{domain_n};
    while (sizes.back() >= 67 && (sizes.back() - 1) % 2 == 0) {
        const std::size_t coarser = (sizes.back() - 1) / 2 + 1;
        const double h_c = 2.0 / double(coarser - 1);
        if (epsilon < 2.0 * h_c || coarser < 33) break;
        sizes.push_back(coarser);
    }
    std::reverse(sizes.begin(), sizes.end());

    MinimizeOptions opt = base;
    ComplexField carry;
    MinimizeResult res;
    std::size_t total_iters = 0;
    for (std::size_t li = 0; li < sizes.size(); ++li) {
        GLProblem p = make_gl_problem(mat, sizes[li], delta, epsilon, degree);
        opt.tol_grad = tol_el * p.grid.hx * p.grid.hy;
        const bool finest = li + 1 == sizes.size();
        if (!finest) opt.tol_grad *= 4.0;  // coarse levels only warm-start the next one
        ComplexField seed;
        if (li == 0) {
            seed = gl_seed(p);
        } else {
            seed = prolongate(carry, p.grid);
            seed.boundary_mask.assign(p.grid.size(), 0);
            impose_boundary(seed, p.g);
            // keep the projection invariant |u| <= 1 after interpolation
            for (Complex& z : seed.v) {
                const double m = std::abs(z);
                if (m > 1.0) z /= m;
            }
        }
        res = minimize(p, &seed, opt);
        total_iters += res.iterations;
        if (!finest) carry = res.u;
    }
    res.iterations = total_iters;
    return res;
}

SlopeReport energy_bound_check(const std::vector<std::pair<double, double>>& eps_energy, double m,
                               double M, int degree, double h, double theta,
                               double resolution_floor) {
    if (eps_energy.size() < 3) throw Error("energy_bound_check: need at least 3 epsilon values");
    for (const auto& [eps, e] : eps_energy)
        if (eps < resolution_floor * h)
            throw Error("energy_bound_check: epsilon " + std::to_string(eps) +
                        " under-resolved (< " + std::to_string(resolution_floor) + " h)");
    // least squares slope of E against x = log(1/eps)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = double(eps_energy.size());
    for (const auto& [eps, e] : eps_energy) {
        const double x = std::log(1.0 / eps);
        sx += x;
        sy += e;
        sxx += x * x;
        sxy += x * e;
    }
    SlopeReport r;
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double slack = 1e-9 * std::max(1.0, M * M_PI * degree);
    r.band_lo = m * M_PI * degree * (1.0 - theta) - slack;
    r.band_hi = M * M_PI * degree * (1.0 + theta) + slack;
    r.within = r.slope >= r.band_lo && r.slope <= r.band_hi;
    return r;
}

std::vector<EpsilonSelection> select_epsilon(const Material& mat, int degree,
                                             const std::vector<EpsilonCase>& cases, double tol_el) {
    std::vector<EpsilonSelection> out;
    // round-off slack keeps the degree-0 bound (= 0) satisfiable
    const double bound = 4.0 * mat.M * M_PI * double(degree) + 1e-12 * (1.0 + mat.M);
    for (std::size_t n1 = 0; n1 < cases.size(); ++n1) {
        const EpsilonCase& c = cases[n1];
        const double np1 = double(c.lemma_index > 0 ? c.lemma_index : n1 + 1);
        const double cap = c.delta * c.delta / np1;
        const double h = 2.0 / double(c.grid_n - 1);
        EpsilonSelection sel;
        sel.delta = c.delta;
        std::vector<double> admissible;
        for (double eps : c.candidates) {
            if (eps < cap && eps >= 4.0 * h) admissible.push_back(eps);
            else sel.rejected_precondition.push_back(eps);
        }
        std::sort(admissible.rbegin(), admissible.rend());
        bool found = false;
        std::string measured;
        for (double eps : admissible) {
            MinimizeResult r = minimize_multilevel(mat, c.grid_n, c.delta, eps, degree, tol_el);
            const double pot = r.potential_term();
            if (pot <= bound) {
                sel.epsilon = eps;
                sel.potential_term = pot;
                sel.result = std::move(r);
                found = true;
                break;
            }
            measured += " eps=" + std::to_string(eps) + " potential=" + std::to_string(pot);
        }
        if (!found)
            throw Error("select_epsilon: no candidate satisfies the potential bound " +
                        std::to_string(bound) + " for delta " + std::to_string(c.delta) +
                        (measured.empty() ? " (all candidates rejected by preconditions)"
                                          : "; measured:" + measured));
        out.push_back(std::move(sel));
    }
    return out;
}

}  // namespace homogl
