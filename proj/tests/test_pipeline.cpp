#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homogl/materials.hpp"
#include "homogl/pipeline.hpp"

using namespace homogl;

namespace {

std::map<std::string, std::string> base_config(const std::string& out_dir) {
    return {
        {"material", "laminate"}, {"mat_base", "2"},   {"mat_amp", "1"},
        {"degree", "1"},          {"deltas", "0.25"},  {"grids", "161"},
        {"eps_candidates_1", "0.05"},                  {"cell_n", "32"},
        {"tol_cg", "1e-10"},      {"tol_el", "2e-4"},  {"out_dir", out_dir},
    };
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ComplexField point_vortex_field(const Grid2D& g, Vec2 a, int d) {
    ComplexField u(g, Complex(1.0, 0.0));
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const Vec2 z = g.node(i, j) - a;
            const double th = std::atan2(z.y, z.x);
            u.at(i, j) = Complex(std::cos(d * th), std::sin(d * th));
        }
    return u;
}

}  // namespace

TEST_CASE("config parsing and validation") {
    SUBCASE("round trip through key=value text") {
        const auto path = (std::filesystem::temp_directory_path() / "homogl_cfg.txt").string();
        {
            std::ofstream os(path);
            os << "# comment line\n"
                  "material = laminate\nmat_base = 2\nmat_amp = 1\n"
                  "degree = 1\ndeltas = 0.25,0.125\ngrids = 161,1153\n"
                  "eps_candidates_1 = 0.05\neps_candidates_2 = 0.0075\n"
                  "out_dir = /tmp/homogl_cfg_out\n";
        }
        const ExperimentConfig c = ExperimentConfig::parse(ExperimentConfig::read_key_values(path));
        CHECK(c.degree == 1);
        CHECK(c.deltas == std::vector<double>{0.25, 0.125});
        CHECK(c.grids == std::vector<std::size_t>{161, 1153});
        CHECK(c.eps_candidates[1] == std::vector<double>{0.0075});
        CHECK(c.r_list.size() == 3);
    }

    SUBCASE("non-decreasing deltas are rejected") {
        auto kv = base_config("/tmp/x");
        kv["deltas"] = "0.25,0.25";
        kv["grids"] = "161,161";
        kv["eps_candidates_2"] = "0.05";
        CHECK_THROWS_AS(ExperimentConfig::parse(kv), Error);
    }

    SUBCASE("epsilon at or above delta^2/n is rejected at validation") {
        auto kv = base_config("/tmp/x");
        kv["eps_candidates_1"] = "0.0625";  // = delta^2 / 1
        CHECK_THROWS_AS(ExperimentConfig::parse(kv), Error);
    }

    SUBCASE("epsilon below the 4h floor is rejected at validation") {
        auto kv = base_config("/tmp/x");
        kv["grids"] = "65";
        CHECK_THROWS_AS(ExperimentConfig::parse(kv), Error);
    }
}

TEST_CASE("homogenized residual check") {
    const Mat2 id{1.0, 0.0, 1.0};

    SUBCASE("constant map has zero defect") {
        const Grid2D g = Grid2D::domain_square(65);
        ComplexField u(g, Complex(0.6, 0.8));
        const ResidualCheck rc = homogenized_residual_check(u, id, VortexSet{}, 0.15, 0.18, 0.25);
        CHECK(rc.bumps > 0);
        CHECK(rc.max_defect <= 1e-13);
        CHECK(rc.max_agreement_error <= 1e-12);
    }

    SUBCASE("exact harmonic map: defect O(h^2), wedge forms agree to 1e-10") {
        const Vec2 a{0.1 + 1.0 / 192.0, 0.05};
        double defects[2];
        int idx = 0;
        for (std::size_t n : {65, 129}) {
            const Grid2D g = Grid2D::domain_square(n);
            const ComplexField u = point_vortex_field(g, a, 1);
            VortexSet vs;
            vs.vortices.push_back(Vortex{a, 0.0, 1});
            const ResidualCheck rc = homogenized_residual_check(u, id, vs, 0.3, 0.18, 0.25);
            CHECK(rc.bumps > 0);
            CHECK(rc.max_agreement_error <= 1e-10);
            defects[idx++] = rc.max_defect;
        }
        CHECK(defects[0] / defects[1] == doctest::Approx(4.0).epsilon(0.5));
        CHECK(defects[1] < 1e-3);
    }

    SUBCASE("exclusions covering the domain are an error") {
        const Grid2D g = Grid2D::domain_square(65);
        ComplexField u(g, Complex(1.0, 0.0));
        VortexSet vs;
        vs.vortices.push_back(Vortex{{0.0, 0.0}, 0.0, 1});
        CHECK_THROWS_AS(homogenized_residual_check(u, id, vs, 3.0, 0.18, 0.25), Error);
    }

    SUBCASE("low modulus outside the exclusions is an error") {
        const Grid2D g = Grid2D::domain_square(65);
        ComplexField u(g, Complex(0.3, 0.0));
        CHECK_THROWS_AS(homogenized_residual_check(u, id, VortexSet{}, 0.15, 0.18, 0.25), Error);
    }
}

TEST_CASE("sweep") {
    SUBCASE("degree 0: no vortices, tiny masses, all verdicts pass") {
        auto kv = base_config("/tmp/homogl_sweep_d0");
        kv["degree"] = "0";
        kv["deltas"] = "0.5,0.4";
        kv["grids"] = "65,161";
        kv["eps_candidates_1"] = "0.15";
        kv["eps_candidates_2"] = "0.06";
        kv["cell_n"] = "32";
        const ExperimentConfig cfg = ExperimentConfig::parse(kv);
        const ConvergenceReport rep = run_sweep(cfg);
        REQUIRE(rep.rows.size() == 2);
        for (const SweepRow& r : rep.rows) {
            REQUIRE(r.ok());
            CHECK(r.vortex_degrees.empty());
            CHECK(r.sum_degree == 0);
            for (double m : r.exterior_mass) CHECK(m < 1e-6);
        }
        CHECK(rep.all_ok());
        full_report(rep);
        CHECK(std::filesystem::exists(cfg.out_dir + "/summary.txt"));
        CHECK(std::filesystem::exists(cfg.out_dir + "/sweep_rows.csv"));
        // every referenced artifact exists
        for (const SweepRow& r : rep.rows)
            if (!r.field_file.empty()) CHECK(std::filesystem::exists(r.field_file));
    }

    SUBCASE("degree 1 single step: one vortex of degree one, report round trip") {
        auto kv = base_config("/tmp/homogl_sweep_d1");
        const ExperimentConfig cfg = ExperimentConfig::parse(kv);
        const ConvergenceReport rep = run_sweep(cfg);
        REQUIRE(rep.rows.size() == 1);
        const SweepRow& r = rep.rows[0];
        REQUIRE(r.ok());
        CHECK(r.epsilon == 0.05);
        CHECK(r.vortex_degrees.size() == 1);
        CHECK(r.sum_degree == 1);
        CHECK(r.max_modulus <= 1.0 + 1e-8);
        CHECK(r.potential_term <= 4.0 * 3.0 * M_PI);
        CHECK(rep.degrees_sum_ok);
        full_report(rep);

        // the report subcommand path reproduces the verdicts from the CSV
        const ConvergenceReport back = report_from_rows(cfg);
        REQUIRE(back.rows.size() == 1);
        CHECK(back.rows[0].sum_degree == 1);
        CHECK(back.degrees_sum_ok == rep.degrees_sum_ok);
        CHECK(back.A0.a11 == doctest::Approx(rep.A0.a11).epsilon(1e-12));
    }

    SUBCASE("determinism: re-running writes byte-identical tables") {
        auto kv = base_config("/tmp/homogl_sweep_det");
        kv["degree"] = "0";
        kv["deltas"] = "0.5";
        kv["grids"] = "65";
        kv["eps_candidates_1"] = "0.15";
        kv["cell_n"] = "16";
        const ExperimentConfig cfg = ExperimentConfig::parse(kv);
        full_report(run_sweep(cfg));
        const std::string rows1 = slurp(cfg.out_dir + "/sweep_rows.csv");
        const std::string summary1 = slurp(cfg.out_dir + "/summary.txt");
        const std::string a01 = slurp(cfg.out_dir + "/A0.csv");
        full_report(run_sweep(cfg));
        CHECK(slurp(cfg.out_dir + "/sweep_rows.csv") == rows1);
        CHECK(slurp(cfg.out_dir + "/summary.txt") == summary1);
        CHECK(slurp(cfg.out_dir + "/A0.csv") == a01);
    }

    SUBCASE("stage errors are recorded and the report is still emitted") {
        auto kv = base_config("/tmp/homogl_sweep_err");
        kv["mat_base"] = "2";
        kv["tol_el"] = "1e-18";  // guaranteed stall in the minimizer
        const ExperimentConfig cfg = ExperimentConfig::parse(kv);
        const ConvergenceReport rep = run_sweep(cfg);
        REQUIRE(rep.rows.size() == 1);
        CHECK(!rep.rows[0].ok());
        CHECK(!rep.rows[0].error.empty());
        CHECK(!rep.all_ok());
        full_report(rep);
        CHECK(std::filesystem::exists(cfg.out_dir + "/summary.txt"));
    }
}
