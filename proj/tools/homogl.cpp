#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "homogl/annulus.hpp"
#include "homogl/cell_homog.hpp"
#include "homogl/io.hpp"
#include "homogl/materials.hpp"
#include "homogl/pipeline.hpp"
#include "homogl/unfolding.hpp"
#include "homogl/vortex.hpp"

using namespace homogl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCriterionFailed = 2;

std::map<std::string, std::string> load_kv(const std::string& config_path,
                                           const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = ExperimentConfig::read_key_values(config_path);
    for (const auto& [k, v] : overrides) kv[k] = v;
    return kv;
}

Material material_from(const std::map<std::string, std::string>& kv) {
    if (!kv.count("material")) {
        auto copy = kv;
        copy["material"] = "laminate";
        return materials::from_params(copy);
    }
    return materials::from_params(kv);
}

int cmd_cell(const std::string& config, const std::map<std::string, std::string>& over,
             std::size_t n, double tol, const std::string& out_dir) {
    const auto kv = load_kv(config, over);
    const Material mat = material_from(kv);
    const auto A = std::make_shared<MatrixField>(sample_matrix_field(mat, Grid2D::unit_cell(n)));
    const CellSolution cs = solve_cell_problem(A, tol);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream os(out_dir + "/A0.csv");
        os << "a11,a12\n" << format_double(cs.A0.a11) << ',' << format_double(cs.A0.a12) << "\n";
        os << "a21,a22\n" << format_double(cs.A0.a12) << ',' << format_double(cs.A0.a22) << "\n";
    }
    write_field(out_dir + "/chi1.hgl", cs.chi1);
    write_field(out_dir + "/chi2.hgl", cs.chi2);
    std::cout << "A0 = [" << cs.A0.a11 << ", " << cs.A0.a12 << "; " << cs.A0.a12 << ", "
              << cs.A0.a22 << "]\n"
              << "asym_defect = " << cs.asym_defect << "\n"
              << "residuals = " << cs.residual1 << ", " << cs.residual2 << "\n"
              << "means = " << cs.mean1 << ", " << cs.mean2 << "\n";
    const bool eig_ok = cs.A0.eig_min() >= mat.m - 1e-9 && cs.A0.eig_max() <= mat.M + 1e-9;
    std::cout << "eig_in_bounds = " << (eig_ok ? "yes" : "no") << "\n";
    return eig_ok ? kExitOk : kExitCriterionFailed;
}

int cmd_minimize(const std::string& config, const std::map<std::string, std::string>& over,
                 double delta, double epsilon, int degree, std::size_t grid, double tol,
                 const std::string& seed_file, const std::string& out) {
    const auto kv = load_kv(config, over);
    const Material mat = material_from(kv);
    MinimizeResult res;
    if (!seed_file.empty()) {
        GLProblem p = make_gl_problem(mat, grid, delta, epsilon, degree);
        ComplexField seed = read_complex_field(seed_file);
        if (!seed.grid.same_layout(p.grid)) throw Error("minimize: seed grid mismatch");
        impose_boundary(seed, p.g);
        MinimizeOptions opt;
        opt.tol_grad = tol * p.grid.hx * p.grid.hy;
        res = minimize(p, &seed, opt);
    } else {
        res = minimize_multilevel(mat, grid, delta, epsilon, degree, tol);
    }
    std::cout << "energy = " << format_double(res.energy) << "\n"
              << "dirichlet_part = " << format_double(res.dirichlet_part) << "\n"
              << "potential_part = " << format_double(res.potential_part) << "\n"
              << "potential_term = " << format_double(res.potential_term()) << "\n"
              << "el_residual = " << format_double(res.el_residual) << "\n"
              << "iterations = " << res.iterations << "\n"
              << "max_modulus = " << format_double(res.u.max_modulus()) << "\n";
    if (!out.empty()) {
        write_field(out, res.u);
        std::cout << "field_file = " << out << "\n";
    }
    return res.u.max_modulus() <= 1.0 + 1e-8 ? kExitOk : kExitCriterionFailed;
}

int cmd_vortex(const std::string& field, double epsilon, double threshold, const std::string& out) {
    const ComplexField u = read_complex_field(field);
    const VortexSet vs = detect_bad_disks(u, epsilon, threshold);
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!out.empty()) {
        f.open(out);
        os = &f;
    }
    *os << "center_x,center_y,radius,degree,lambda\n";
    for (const Vortex& v : vs.vortices)
        *os << format_double(v.center.x) << ',' << format_double(v.center.y) << ','
            << format_double(v.radius) << ',' << v.degree << ','
            << format_double(v.radius / epsilon) << '\n';
    return kExitOk;
}

int cmd_unfold(const std::string& config, const std::map<std::string, std::string>& over,
               const std::string& field, double delta, std::size_t cell_n, double tol,
               const std::string& out) {
    const auto kv = load_kv(config, over);
    const Material mat = material_from(kv);
    const ComplexField u = read_complex_field(field);
    const auto A = std::make_shared<MatrixField>(sample_matrix_field(mat, Grid2D::unit_cell(cell_n)));
    const CellSolution cs = solve_cell_problem(A, tol);
    const TwoScaleFit fit = extract_two_scale_pair(u, delta, cs);
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!out.empty()) {
        f.open(out);
        os = &f;
    }
    *os << "anchor_x,anchor_y,G1_re,G1_im,G2_re,G2_im,c1_re,c1_im,c2_re,c2_im,residual,flagged\n";
    for (const TwoScaleCellFit& c : fit.cells)
        *os << format_double(c.anchor.x) << ',' << format_double(c.anchor.y) << ','
            << format_double(c.G1.real()) << ',' << format_double(c.G1.imag()) << ','
            << format_double(c.G2.real()) << ',' << format_double(c.G2.imag()) << ','
            << format_double(c.coeff1.real()) << ',' << format_double(c.coeff1.imag()) << ','
            << format_double(c.coeff2.real()) << ',' << format_double(c.coeff2.imag()) << ','
            << format_double(c.residual) << ',' << (c.flagged ? 1 : 0) << '\n';
    return kExitOk;
}

int cmd_annulus(const std::string& config, const std::map<std::string, std::string>& over,
                double alpha, double beta, int kappa, std::size_t nr, std::size_t ntheta,
                double tol, const std::string& out_dir) {
    const auto kv = load_kv(config, over);
    const Material mat = material_from(kv);
    const MuResult mu = compute_mu(mat, alpha, beta, kappa, nr, ntheta, tol);
    std::cout << "mu = " << format_double(mu.mu) << "\n"
              << "lower = " << format_double(mu.lower) << "\n"
              << "upper = " << format_double(mu.upper) << "\n"
              << "neumann_defect = " << format_double(mu.neumann_defect) << "\n"
              << "residual = " << format_double(mu.residual) << "\n";
    const CompetitorResult comp = build_boundary_competitor(mat, alpha, beta, kappa, nr, ntheta, tol);
    std::cout << "competitor_energy = " << format_double(comp.energy) << "\n"
              << "excess = " << format_double(comp.excess) << "\n"
              << "theta0 = " << format_double(comp.theta0) << "\n"
              << "r1 = " << format_double(comp.r1) << "\n"
              << "r2 = " << format_double(comp.r2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_field(out_dir + "/mu_lift.hgl", mu.lift.h);
        write_field(out_dir + "/competitor_lift.hgl", comp.lift.h);
        std::cout << "lift_files = " << out_dir << "/mu_lift.hgl, " << out_dir
                  << "/competitor_lift.hgl\n";
    }
    return kExitOk;
}

int cmd_sweep(const std::string& config, const std::map<std::string, std::string>& over) {
    const ExperimentConfig cfg = ExperimentConfig::parse(load_kv(config, over));
    const ConvergenceReport rep = run_sweep(cfg);
    full_report(rep);
    std::cout << "report written to " << cfg.out_dir << "\n";
    return rep.all_ok() ? kExitOk : kExitCriterionFailed;
}

int cmd_report(const std::string& config, const std::map<std::string, std::string>& over) {
    const ExperimentConfig cfg = ExperimentConfig::parse(load_kv(config, over));
    const ConvergenceReport rep = report_from_rows(cfg);
    full_report(rep);
    std::cout << "report rebuilt in " << cfg.out_dir << "\n";
    return rep.all_ok() ? kExitOk : kExitCriterionFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homogl: two-parameter Ginzburg-Landau homogenization toolkit"};
    app.require_subcommand(1);

    std::string config, out, seed_file, field;
    std::vector<std::string> set_kv;
    std::size_t grid_n = 257, cell_n = 128, nr = 257, ntheta = 256;
    double delta = 0.25, epsilon = 0.05, tol = 1e-10, tol_el = 2e-4, threshold = 0.5;
    double alpha = 0.05, beta = 0.4;
    int degree = 1, kappa = 1;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--config", config, "flat key = value configuration file");
        c->add_option("--set", set_kv, "override key=value pairs");
    };

    auto* cell = app.add_subcommand("cell", "solve the periodic cell problem and emit A0");
    add_common(cell);
    cell->add_option("--n", cell_n, "cell grid nodes per side");
    cell->add_option("--tol", tol, "CG relative tolerance");
    cell->add_option("--out", out, "output directory")->required();

    auto* mini = app.add_subcommand("minimize", "minimize the Ginzburg-Landau energy");
    add_common(mini);
    mini->add_option("--delta", delta, "oscillation scale")->required();
    mini->add_option("--epsilon", epsilon, "GL parameter")->required();
    mini->add_option("--degree", degree, "boundary degree");
    mini->add_option("--grid", grid_n, "domain nodes per side");
    mini->add_option("--tol", tol_el, "Euler-Lagrange residual target");
    mini->add_option("--seed-file", seed_file, "initial field (binary format)");
    mini->add_option("--out", out, "output field file");

    auto* vort = app.add_subcommand("vortex", "detect bad disks of a stored field");
    vort->add_option("--field", field, "input field file")->required();
    vort->add_option("--epsilon", epsilon, "GL parameter used for lambda")->required();
    vort->add_option("--threshold", threshold, "bad-disk modulus threshold");
    vort->add_option("--out", out, "output CSV (stdout when absent)");

    auto* unf = app.add_subcommand("unfold", "two-scale fit of a stored minimizer");
    add_common(unf);
    unf->add_option("--field", field, "input field file")->required();
    unf->add_option("--delta", delta, "oscillation scale")->required();
    unf->add_option("--cell-n", cell_n, "cell grid nodes per side");
    unf->add_option("--tol", tol, "CG relative tolerance");
    unf->add_option("--out", out, "output CSV (stdout when absent)");

    auto* ann = app.add_subcommand("annulus", "minimal S1-map energy on an annulus");
    add_common(ann);
    ann->add_option("--alpha", alpha, "inner radius")->required();
    ann->add_option("--beta", beta, "outer radius")->required();
    ann->add_option("--kappa", kappa, "degree");
    ann->add_option("--nr", nr, "radial nodes");
    ann->add_option("--ntheta", ntheta, "angular nodes");
    ann->add_option("--tol", tol, "CG relative tolerance");
    ann->add_option("--out", out, "output directory for lift fields");

    auto* sweep = app.add_subcommand("sweep", "run a (delta_n, eps_n) sweep and report");
    add_common(sweep);

    auto* report = app.add_subcommand("report", "rebuild the report from sweep_rows.csv");
    add_common(report);

    CLI11_PARSE(app, argc, argv);

    std::map<std::string, std::string> over;
    for (const std::string& s : set_kv) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << s << "'\n";
            return kExitError;
        }
        over[s.substr(0, eq)] = s.substr(eq + 1);
    }

    try {
        if (cell->parsed()) return cmd_cell(config, over, cell_n, tol, out);
        if (mini->parsed())
            return cmd_minimize(config, over, delta, epsilon, degree, grid_n, tol_el, seed_file, out);
        if (vort->parsed()) return cmd_vortex(field, epsilon, threshold, out);
        if (unf->parsed()) return cmd_unfold(config, over, field, delta, cell_n, tol, out);
        if (ann->parsed())
            return cmd_annulus(config, over, alpha, beta, kappa, nr, ntheta, tol, out);
        if (sweep->parsed()) return cmd_sweep(config, over);
        if (report->parsed()) return cmd_report(config, over);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
