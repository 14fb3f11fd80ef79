#include <doctest.h>

#include <cmath>
#include <random>

#include "homogl/gl_solver.hpp"
#include "homogl/materials.hpp"
#include "homogl/vortex.hpp"

using namespace homogl;

namespace {

double rand01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

TEST_CASE("energy quadrature") {
    SUBCASE("u = 1 with degree-0 data has zero energy") {
        GLProblem p = make_gl_problem(materials::constant(1.0), 17, 1.0, 0.5, 0);
        ComplexField u(p.grid, Complex(1.0, 0.0));
        impose_boundary(u, p.g);
        const EnergyParts e = gl_energy(p, u);
        CHECK(e.dirichlet == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(e.potential == doctest::Approx(0.0).epsilon(1e-14));
    }

    SUBCASE("harmonic-extension style seed has finite positive energy for d >= 1") {
        GLProblem p = make_gl_problem(materials::constant(1.0), 33, 1.0, 0.2, 1);
        const ComplexField u = gl_seed(p);
        const EnergyParts e = gl_energy(p, u);
        CHECK(e.total > 0.0);
        CHECK(std::isfinite(e.total));
        CHECK(e.total == doctest::Approx(e.dirichlet + e.potential).epsilon(1e-15));
    }

    SUBCASE("hand quadrature oracle on a small strip") {
        // linear u: the corner-gradient rule integrates the Dirichlet part
        // exactly; the potential follows the trapezoidal node weights
        const double eps = 0.5, cA = 2.0;
        GLProblem p;
        p.grid = Grid2D::square(3, 3, {0.0, 0.0}, 0.5);
        p.A_delta = std::make_shared<MatrixField>(
            sample_matrix_field(materials::constant(cA), p.grid, 1.0));
        p.epsilon = eps;
        p.delta = 1.0;
        p.g.degree = 0;  // no boundary data needed for the energy
        ComplexField u(p.grid);
        const Complex gx(0.3, -0.1), gy(0.2, 0.4);
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                u.at(i, j) = gx * p.grid.x(i) + gy * p.grid.y(j);
        // independent hand computation
        const double dir_hand = 0.5 * cA * (std::norm(gx) + std::norm(gy)) * 1.0;  // area = 1
        double pot_hand = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 3; ++i) {
                const double w = ((i == 1) ? 1.0 : 0.5) * ((j == 1) ? 1.0 : 0.5);
                const double q = 1.0 - std::norm(u.at(i, j));
                pot_hand += w * 0.25 * q * q / (4.0 * eps * eps);
            }
        const EnergyParts e = gl_energy(p, u);
        CHECK(e.dirichlet == doctest::Approx(dir_hand).epsilon(1e-13));
        CHECK(e.potential == doctest::Approx(pot_hand).epsilon(1e-13));
    }
}

TEST_CASE("hand-coded gradient matches finite differences") {
    // off-diagonal A entries exercised; relative error target 1e-5
    GLProblem p = make_gl_problem(materials::rotating(1.0, 3.0, 0.4, 0.9), 17, 0.5, 0.3, 1);
    DivAGradOperator op(p.A_delta, BC::dirichlet);
    ComplexField u = gl_seed(p);
    std::mt19937_64 rng(17);
    for (std::size_t k = 0; k < u.v.size(); ++k)
        if (!u.boundary_mask[k])
            u.v[k] += Complex(0.3 * (rand01(rng) - 0.5), 0.3 * (rand01(rng) - 0.5));

    // gradient via the solver's convention: dE/du per node
    std::vector<Complex> grad;
    op.accumulate_deposits(u, grad);
    for (std::size_t k = 0; k < grad.size(); ++k)
        if (u.boundary_mask[k]) grad[k] = Complex(0.0, 0.0);
    for (std::size_t j = 0; j < p.grid.ny; ++j)
        for (std::size_t i = 0; i < p.grid.nx; ++i) {
            const std::size_t k = p.grid.idx(i, j);
            if (u.boundary_mask[k]) continue;
            const Complex z = u.v[k];
            const double q = 1.0 - std::norm(z);
            grad[k] -= (p.grid.node_volume(i, j) / (p.epsilon * p.epsilon) * q) * z;
        }

    for (int trial = 0; trial < 10; ++trial) {
        ComplexField dir(p.grid);
        for (std::size_t k = 0; k < dir.v.size(); ++k)
            if (!u.boundary_mask[k])
                dir.v[k] = Complex(rand01(rng) - 0.5, rand01(rng) - 0.5);
        double analytic = 0.0;
        for (std::size_t k = 0; k < grad.size(); ++k)
            analytic += grad[k].real() * dir.v[k].real() + grad[k].imag() * dir.v[k].imag();
        const double t = 1e-6;
        ComplexField up = u, um = u;
        for (std::size_t k = 0; k < u.v.size(); ++k) {
            up.v[k] += t * dir.v[k];
            um.v[k] -= t * dir.v[k];
        }
        const double fd = (gl_energy(p, up).total - gl_energy(p, um).total) / (2.0 * t);
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("minimize") {
    SUBCASE("degree 0 converges to the constant map with zero energy") {
        GLProblem p = make_gl_problem(materials::laminate(2.0, 1.0), 33, 0.25, 0.3, 0);
        MinimizeOptions opt;
        opt.tol_grad = 1e-12;
        const MinimizeResult r = minimize(p, nullptr, opt);
        CHECK(r.energy <= 1e-12);
        for (const Complex& z : r.u.v) CHECK(std::abs(z - Complex(1.0, 0.0)) < 1e-6);
    }

    SUBCASE("degree 1 minimizer: modulus bound, descent, Euler-Lagrange residual") {
        GLProblem p = make_gl_problem(materials::constant(1.0), 129, 0.25, 0.1, 1);
        const ComplexField seed = gl_seed(p);
        const double seed_energy = gl_energy(p, seed).total;
        MinimizeOptions opt;
        opt.tol_grad = 1e-5 * p.grid.hx * p.grid.hy;
        const MinimizeResult r = minimize(p, &seed, opt);

        CHECK(r.u.max_modulus() <= 1.0 + 1e-8);
        CHECK(r.energy <= seed_energy);  // descent
        CHECK(r.energy == doctest::Approx(r.dirichlet_part + r.potential_part).epsilon(1e-14));
        CHECK(r.el_residual <= 1e-5);

        // Euler-Lagrange consistency via the elliptic operator directly
        DivAGradOperator op(p.A_delta, BC::dirichlet);
        const ComplexField Lu = op.apply(r.u);
        double sup = 0.0;
        for (std::size_t j = 1; j + 1 < p.grid.ny; ++j)
            for (std::size_t i = 1; i + 1 < p.grid.nx; ++i) {
                const Complex z = r.u.at(i, j);
                const Complex el = -Lu.at(i, j) -
                                   (1.0 / (p.epsilon * p.epsilon)) * z * (1.0 - std::norm(z));
                sup = std::max(sup, std::max(std::abs(el.real()), std::abs(el.imag())));
            }
        CHECK(sup <= 1e-5 * 1.0001);

        // exactly one vortex of degree one
        const VortexSet vs = detect_bad_disks(r.u, p.epsilon);
        CHECK(vs.vortices.size() == 1);
        CHECK(vs.vortices[0].degree == 1);
    }

    SUBCASE("multilevel matches the single-level answer") {
        const Material mat = materials::constant(1.0);
        const MinimizeResult a = minimize_multilevel(mat, 65, 0.25, 0.15, 1, 2e-5);
        GLProblem p = make_gl_problem(mat, 65, 0.25, 0.15, 1);
        MinimizeOptions opt;
        opt.tol_grad = 2e-5 * p.grid.hx * p.grid.hy;
        const MinimizeResult b = minimize(p, nullptr, opt);
        CHECK(a.energy == doctest::Approx(b.energy).epsilon(1e-6));
    }

    SUBCASE("a gradient target under the round-off floor stalls with a clear error") {
        GLProblem p = make_gl_problem(materials::constant(1.0), 65, 0.25, 0.15, 1);
        MinimizeOptions opt;
        opt.tol_grad = 1e-18;
        CHECK_THROWS_AS(minimize(p, nullptr, opt), MinimizeError);
    }

    SUBCASE("iteration exhaustion carries the last iterate") {
        GLProblem p = make_gl_problem(materials::constant(1.0), 65, 0.25, 0.1, 1);
        MinimizeOptions opt;
        opt.tol_grad = 1e-14;
        opt.max_iter = 3;
        try {
            minimize(p, nullptr, opt);
            CHECK(false);
        } catch (const MinimizeError& e) {
            CHECK(e.last_iterate().iterations == 3);
            CHECK(e.last_iterate().u.max_modulus() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("energy bound check") {
    SUBCASE("under-resolved epsilon is refused") {
        std::vector<std::pair<double, double>> pts{{0.1, 7.0}, {0.05, 9.0}, {0.002, 11.0}};
        CHECK_THROWS_AS(energy_bound_check(pts, 1.0, 1.0, 1, 2.0 / 256.0), Error);
    }

    SUBCASE("fewer than three points is refused") {
        std::vector<std::pair<double, double>> pts{{0.1, 7.0}, {0.05, 9.0}};
        CHECK_THROWS_AS(energy_bound_check(pts, 1.0, 1.0, 1, 1e-3), Error);
    }

    SUBCASE("degree 0 slope is flat") {
        std::vector<std::pair<double, double>> pts{{0.1, 1e-13}, {0.05, 2e-13}, {0.025, 1.5e-13}};
        const SlopeReport r = energy_bound_check(pts, 1.0, 1.0, 0, 1e-3);
        CHECK(r.within);
        CHECK(std::abs(r.slope) < 1e-9);
    }

    SUBCASE("synthetic slope inside the band passes, outside fails") {
        auto mk = [](double s) {
            std::vector<std::pair<double, double>> pts;
            for (double eps : {0.1, 0.05, 0.025}) pts.emplace_back(eps, s * std::log(1.0 / eps) + 1.3);
            return pts;
        };
        CHECK(energy_bound_check(mk(M_PI), 1.0, 1.0, 1, 1e-3).within);
        CHECK(!energy_bound_check(mk(0.5 * M_PI), 1.0, 1.0, 1, 1e-3).within);
        CHECK(!energy_bound_check(mk(1.5 * M_PI), 1.0, 1.0, 1, 1e-3).within);
    }
}

TEST_CASE("epsilon selection") {
    const Material id = materials::constant(1.0);

    SUBCASE("degree 0 accepts the first candidate with tiny potential") {
        EpsilonCase c;
        c.delta = 0.25;
        c.grid_n = 161;
        c.candidates = {0.05, 0.03};
        c.lemma_index = 1;
        const auto sel = select_epsilon(id, 0, {c}, 1e-5);
        CHECK(sel[0].epsilon == 0.05);
        CHECK(sel[0].potential_term <= 1e-10);
    }

    SUBCASE("degree 1: largest admissible candidate satisfies the 4 M pi d bound") {
        EpsilonCase c;
        c.delta = 0.25;
        c.grid_n = 161;
        c.candidates = {0.05, 0.03, 0.02};
        c.lemma_index = 1;
        const auto sel = select_epsilon(id, 1, {c}, 2e-4);
        CHECK(sel[0].epsilon == 0.05);
        CHECK(sel[0].potential_term <= 4.0 * M_PI);
        CHECK(sel[0].potential_term > 0.0);
        CHECK(sel[0].result.u.max_modulus() <= 1.0 + 1e-8);
    }

    SUBCASE("candidates violating eps < delta^2/n are rejected before solving") {
        EpsilonCase c;
        c.delta = 0.25;
        c.grid_n = 161;
        c.candidates = {0.07, 0.05};  // 0.07 > 0.25^2 = 0.0625
        c.lemma_index = 1;
        const auto sel = select_epsilon(id, 1, {c}, 2e-4);
        CHECK(sel[0].epsilon == 0.05);
        REQUIRE(sel[0].rejected_precondition.size() == 1);
        CHECK(sel[0].rejected_precondition[0] == 0.07);
    }

    SUBCASE("no admissible candidate is an error") {
        EpsilonCase c;
        c.delta = 0.25;
        c.grid_n = 161;
        c.candidates = {0.07};  // above the delta^2/n cap
        c.lemma_index = 1;
        CHECK_THROWS_AS(select_epsilon(id, 1, {c}, 2e-4), Error);
    }

    SUBCASE("epsilon below the 4h resolution floor is rejected before solving") {
        EpsilonCase c;
        c.delta = 0.25;
        c.grid_n = 65;  // h = 1/32, floor = 1/8
        c.candidates = {0.05};
        c.lemma_index = 1;
        CHECK_THROWS_AS(select_epsilon(id, 1, {c}, 2e-4), Error);
    }
}
