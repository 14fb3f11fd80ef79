#include "homogl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homogl/io.hpp"
#include "homogl/materials.hpp"

namespace homogl {

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double bump1d(double t) {
    const double t2 = t * t;
    return t2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t2)) : 0.0;
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::read_key_values(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

ExperimentConfig ExperimentConfig::parse(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    c.raw = kv;
    c.material = materials::from_params(kv);
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("degree")) c.degree = std::stoi(*v);
    if (auto v = get("deltas")) c.deltas = parse_list(*v);
    if (auto v = get("grids")) {
        c.grids.clear();
        for (double x : parse_list(*v)) c.grids.push_back(std::size_t(x));
    }
    c.eps_candidates.assign(c.deltas.size(), {});
    for (std::size_t n = 0; n < c.deltas.size(); ++n) {
        auto it = kv.find("eps_candidates_" + std::to_string(n + 1));
        if (it != kv.end()) c.eps_candidates[n] = parse_list(it->second);
    }
    if (auto v = get("cell_n")) c.cell_n = std::size_t(std::stoul(*v));
    if (auto v = get("tol_cg")) c.tol_cg = std::stod(*v);
    if (auto v = get("tol_el")) c.tol_el = std::stod(*v);
    if (auto v = get("r_list")) c.r_list = parse_list(*v);
    if (auto v = get("mass_ratio_ceiling")) c.mass_ratio_ceiling = std::stod(*v);
    if (auto v = get("residual_slack")) c.residual_slack = std::stod(*v);
    if (auto v = get("bump_width")) c.bump_width = std::stod(*v);
    if (auto v = get("bump_spacing")) c.bump_spacing = std::stod(*v);
    if (auto v = get("out_dir")) c.out_dir = *v;
    if (auto v = get("write_fields")) c.write_fields = *v != "0" && *v != "false";
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (deltas.empty()) throw Error("config: empty delta list");
    for (std::size_t k = 1; k < deltas.size(); ++k)
        if (!(deltas[k] < deltas[k - 1])) throw Error("config: delta list must be strictly decreasing");
    if (grids.size() != deltas.size())
        throw Error("config: grids must list one grid size per delta");
    if (eps_candidates.size() != deltas.size())
        throw Error("config: epsilon candidates must list one grid per delta");
    if (degree < 0) throw Error("config: degree must be nonnegative");
    for (std::size_t n = 0; n < deltas.size(); ++n) {
        if (grids[n] < 17) throw Error("config: grid too small");
        if (eps_candidates[n].empty())
            throw Error("config: missing eps_candidates_" + std::to_string(n + 1));
        const double h = 2.0 / double(grids[n] - 1);
        const double cap = deltas[n] * deltas[n] / double(n + 1);
        for (double eps : eps_candidates[n]) {
            if (!(eps >= 4.0 * h))
                throw Error("config: epsilon " + std::to_string(eps) + " is below the 4h floor of grid " +
                            std::to_string(grids[n]));
            if (!(eps < cap))
                throw Error("config: epsilon " + std::to_string(eps) + " violates eps < delta^2/n = " +
                            std::to_string(cap));
        }
    }
    if (r_list.empty()) throw Error("config: empty exclusion radius list");
}

ResidualCheck homogenized_residual_check(const ComplexField& u, Mat2 A0, const VortexSet& vortices,
                                         double R, double bump_width, double bump_spacing) {
    const Grid2D& g = u.grid;
    const double x0 = g.origin.x, x1 = g.origin.x + double(g.nx - 1) * g.hx;
    const double y0 = g.origin.y, y1 = g.origin.y + double(g.ny - 1) * g.hy;

    auto excluded = [&](Vec2 p) {
        for (const Vortex& v : vortices.vortices)
            if (norm(p - v.center) < R) return true;
        return false;
    };
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i)
            if (!excluded(g.node(i, j)) && std::abs(u.at(i, j)) < 0.5)
                throw Error("homogenized_residual_check: |u| < 1/2 outside the exclusion disks");

    ComplexField v = u;
    for (Complex& z : v.v) {
        const double m = std::abs(z);
        z = m > 1e-12 ? z / m : Complex(1.0, 0.0);
    }

    // bump centers on a lattice, clear of the boundary and the exclusion disks
    const double w = bump_width;
    std::vector<Vec2> centers;
    for (double cy = y0 + w; cy <= y1 - w + 1e-12; cy += bump_spacing)
        for (double cx = x0 + w; cx <= x1 - w + 1e-12; cx += bump_spacing) {
            const Vec2 c{cx, cy};
            bool clear = true;
            for (const Vortex& vx : vortices.vortices)
                if (norm(c - vx.center) < R + 1.5 * w) clear = false;
            if (clear) centers.push_back(c);
        }
    if (centers.empty())
        throw Error("homogenized_residual_check: exclusion disks leave no room for test bumps");

    ResidualCheck out;
    out.bumps = centers.size();
    const double inv_hx = 1.0 / g.hx, inv_hy = 1.0 / g.hy;
    const double wq = 0.25 * g.hx * g.hy;

    for (const Vec2& c : centers) {
        // cell bounding box of the support
        const auto clamp_i = [&](double x) {
            return std::size_t(std::clamp((x - x0) * inv_hx, 0.0, double(g.nx - 1)));
        };
        const auto clamp_j = [&](double y) {
            return std::size_t(std::clamp((y - y0) * inv_hy, 0.0, double(g.ny - 1)));
        };
        const std::size_t ia = clamp_i(c.x - w), ib = std::min(clamp_i(c.x + w) + 1, g.nx - 1);
        const std::size_t ja = clamp_j(c.y - w), jb = std::min(clamp_j(c.y + w) + 1, g.ny - 1);

        auto phi = [&](std::size_t i, std::size_t j) {
            return bump1d((g.x(i) - c.x) / w) * bump1d((g.y(j) - c.y) / w);
        };

        Complex lhs{}, rhs{};
        double wedge_T = 0.0, wedge_W = 0.0, nrm = 0.0;
        for (std::size_t j = ja; j < jb; ++j)
            for (std::size_t i = ia; i < ib; ++i) {
                const Complex f00 = v.at(i, j), f10 = v.at(i + 1, j), f01 = v.at(i, j + 1),
                              f11 = v.at(i + 1, j + 1);
                const Complex dxb = (f10 - f00) * inv_hx, dxt = (f11 - f01) * inv_hx;
                const Complex dyl = (f01 - f00) * inv_hy, dyr = (f11 - f10) * inv_hy;
                const double p00 = phi(i, j), p10 = phi(i + 1, j), p01 = phi(i, j + 1),
                             p11 = phi(i + 1, j + 1);
                const double pxb = (p10 - p00) * inv_hx, pxt = (p11 - p01) * inv_hx;
                const double pyl = (p01 - p00) * inv_hy, pyr = (p11 - p10) * inv_hy;

                const Complex vs[4] = {f00, f10, f01, f11};
                const Complex gxs[4] = {dxb, dxb, dxt, dxt};
                const Complex gys[4] = {dyl, dyr, dyl, dyr};
                const double pxs[4] = {pxb, pxb, pxt, pxt};
                const double pys[4] = {pyl, pyr, pyl, pyr};
                const double ps[4] = {p00, p10, p01, p11};
                for (int q = 0; q < 4; ++q) {
                    const Complex gx = gxs[q], gy = gys[q];
                    const Complex sx = A0.a11 * gx + A0.a12 * gy;
                    const Complex sy = A0.a12 * gx + A0.a22 * gy;
                    const Complex pair = sx * pxs[q] + sy * pys[q];
                    lhs += wq * pair;
                    const double dens = A0.a11 * (gx.real() * gx.real() + gx.imag() * gx.imag()) +
                                        2.0 * A0.a12 * (gx.real() * gy.real() + gx.imag() * gy.imag()) +
                                        A0.a22 * (gy.real() * gy.real() + gy.imag() * gy.imag());
                    rhs += wq * dens * ps[q] * vs[q];
                    wedge_T += wq * wedge(pair, vs[q]);
                    wedge_W += wq * (wedge(sx, vs[q]) * pxs[q] + wedge(sy, vs[q]) * pys[q]);
                    nrm += wq * (std::sqrt(pxs[q] * pxs[q] + pys[q] * pys[q]) + std::abs(ps[q]));
                }
            }
        if (nrm == 0.0) continue;
        out.max_defect = std::max(out.max_defect, std::abs(lhs - rhs) / nrm);
        out.max_wedge_defect = std::max(out.max_wedge_defect, std::abs(wedge_T) / nrm);
        out.max_agreement_error = std::max(out.max_agreement_error, std::abs(wedge_T - wedge_W));
    }
    return out;
}

namespace {

std::string degrees_string(const SweepRow& row) {
    std::string s;
    for (const auto& [c, d] : row.vortex_degrees) {
        if (!s.empty()) s += ';';
        s += std::to_string(d);
    }
    return s.empty() ? "-" : s;
}

void compute_verdicts(ConvergenceReport& rep) {
    const ExperimentConfig& cfg = rep.config;
    std::vector<const SweepRow*> ok;
    for (const SweepRow& r : rep.rows)
        if (r.ok()) ok.push_back(&r);

    rep.masses_bounded = !ok.empty();
    for (std::size_t ri = 0; ri < cfg.r_list.size() && rep.masses_bounded; ++ri) {
        double lo = 1e300, hi = 0.0;
        for (const SweepRow* r : ok) {
            lo = std::min(lo, r->exterior_mass[ri]);
            hi = std::max(hi, r->exterior_mass[ri]);
        }
        if (cfg.degree == 0) continue;  // all masses ~0, ratio meaningless
        if (!(hi <= cfg.mass_ratio_ceiling * std::max(lo, 1e-300))) rep.masses_bounded = false;
    }

    rep.degrees_stable = !ok.empty();
    for (std::size_t k = 1; k < ok.size(); ++k) {
        auto multiset_of = [](const SweepRow* r) {
            std::vector<int> d;
            for (const auto& [c, deg] : r->vortex_degrees) d.push_back(deg);
            std::sort(d.begin(), d.end());
            return d;
        };
        if (multiset_of(ok[k]) != multiset_of(ok[0])) rep.degrees_stable = false;
    }

    rep.degrees_sum_ok = !ok.empty();
    for (const SweepRow* r : ok)
        if (r->sum_degree != cfg.degree) rep.degrees_sum_ok = false;

    rep.residual_trend_ok = !ok.empty();
    for (std::size_t k = 1; k < ok.size(); ++k) {
        if (!(ok[k]->residual_defect <= cfg.residual_slack * ok[k - 1]->residual_defect)) {
            rep.residual_trend_ok = false;
            rep.trend_flags.push_back("residual row " + std::to_string(ok[k]->n) + " non-monotone");
        }
    }

    rep.twoscale_trend_ok = !ok.empty();
    for (std::size_t k = 1; k < ok.size(); ++k) {
        const bool decreasing = ok[k]->twoscale_residual < ok[k - 1]->twoscale_residual ||
                                ok[k]->twoscale_residual <= 1e-10;  // flat at zero (degree 0)
        if (!decreasing) {
            rep.twoscale_trend_ok = false;
            rep.trend_flags.push_back("two-scale row " + std::to_string(ok[k]->n) + " non-decreasing");
        }
    }
}

}  // namespace

ConvergenceReport run_sweep(const ExperimentConfig& config) {
    config.validate();
    ConvergenceReport rep;
    rep.config = config;
    std::filesystem::create_directories(config.out_dir);

    // homogenized matrix once per material
    const auto cellA = std::make_shared<MatrixField>(
        sample_matrix_field(config.material, Grid2D::unit_cell(config.cell_n)));
    const CellSolution cell = solve_cell_problem(cellA, config.tol_cg);
    rep.A0 = cell.A0;
    rep.cell_asym_defect = cell.asym_defect;

    for (std::size_t n1 = 0; n1 < config.deltas.size(); ++n1) {
        SweepRow row;
        row.n = n1 + 1;
        row.delta = config.deltas[n1];
        try {
            EpsilonCase ec;
            ec.delta = config.deltas[n1];
            ec.grid_n = config.grids[n1];
            ec.candidates = config.eps_candidates[n1];
            ec.lemma_index = n1 + 1;
            std::vector<EpsilonCase> single{ec};
            auto sel = select_epsilon(config.material, config.degree, single, config.tol_el);
            EpsilonSelection& s = sel.front();

            row.epsilon = s.epsilon;
            row.energy = s.result.energy;
            row.dirichlet = s.result.dirichlet_part;
            row.potential = s.result.potential_part;
            row.potential_term = s.potential_term;
            row.iterations = s.result.iterations;
            row.max_modulus = s.result.u.max_modulus();

            const ComplexField& u = s.result.u;
            const VortexSet vs = detect_bad_disks(u, s.epsilon);
            row.lambda_ratio = vs.lambda_ratio;
            row.sum_degree = vs.total_degree();
            for (const Vortex& v : vs.vortices) row.vortex_degrees.emplace_back(v.center, v.degree);

            row.exterior_mass.resize(config.r_list.size(), 0.0);
            for (std::size_t ri = 0; ri < config.r_list.size(); ++ri) {
                const double R = config.r_list[ri];
                row.exterior_mass[ri] = masked_dirichlet_integral(u, nullptr, [&](Vec2 p) {
                    for (const Vortex& v : vs.vortices)
                        if (norm(p - v.center) < R) return false;
                    return true;
                });
            }

            const ResidualCheck rc = homogenized_residual_check(u, rep.A0, vs, config.r_list[0],
                                                                config.bump_width, config.bump_spacing);
            row.residual_defect = rc.max_defect;

            const TwoScaleFit fit = extract_two_scale_pair(u, row.delta, cell);
            const double keep_R = config.r_list[0];
            row.twoscale_residual = fit.relative_residual([&](Vec2 anchor) {
                const Vec2 center{anchor.x + 0.5 * row.delta, anchor.y + 0.5 * row.delta};
                for (const Vortex& v : vs.vortices)
                    if (norm(center - v.center) < keep_R + row.delta) return false;
                return true;
            });

            if (config.write_fields) {
                row.field_file = config.out_dir + "/u_n" + std::to_string(row.n) + ".hgl";
                write_field(row.field_file, u);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rep.rows.push_back(std::move(row));
    }

    compute_verdicts(rep);
    return rep;
}

namespace {

void write_rows_csv(const ConvergenceReport& rep, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("full_report: cannot open " + path);
    os << "n,delta,epsilon,energy,dirichlet,potential,potential_term,max_modulus,iterations,"
          "num_vortices,degrees,sum_degree,lambda";
    for (double R : rep.config.r_list) os << ",mass_R" << format_double(R);
    os << ",residual_defect,twoscale_residual,field_file,error\n";
    for (const SweepRow& r : rep.rows) {
        os << r.n << ',' << format_double(r.delta) << ',' << format_double(r.epsilon) << ','
           << format_double(r.energy) << ',' << format_double(r.dirichlet) << ','
           << format_double(r.potential) << ',' << format_double(r.potential_term) << ','
           << format_double(r.max_modulus) << ',' << r.iterations << ',' << r.vortex_degrees.size()
           << ',' << degrees_string(r) << ',' << r.sum_degree << ',' << format_double(r.lambda_ratio);
        for (std::size_t ri = 0; ri < rep.config.r_list.size(); ++ri)
            os << ',' << format_double(ri < r.exterior_mass.size() ? r.exterior_mass[ri] : 0.0);
        os << ',' << format_double(r.residual_defect) << ',' << format_double(r.twoscale_residual)
           << ',' << (r.field_file.empty() ? "-" : r.field_file) << ','
           << (r.error.empty() ? "-" : r.error) << '\n';
    }
}

const char* verdict(bool b) { return b ? "PASS" : "FAIL"; }

}  // namespace

void full_report(const ConvergenceReport& rep) {
    const std::string& dir = rep.config.out_dir;
    std::filesystem::create_directories(dir);

    write_rows_csv(rep, dir + "/sweep_rows.csv");

    {
        std::ofstream os(dir + "/energy_vs_logeps.csv");
        os << "n,delta,epsilon,log_inv_eps,energy,dirichlet,potential\n";
        for (const SweepRow& r : rep.rows) {
            if (!r.ok()) continue;
            os << r.n << ',' << format_double(r.delta) << ',' << format_double(r.epsilon) << ','
               << format_double(std::log(1.0 / r.epsilon)) << ',' << format_double(r.energy) << ','
               << format_double(r.dirichlet) << ',' << format_double(r.potential) << '\n';
        }
    }
    {
        std::ofstream os(dir + "/exterior_mass.csv");
        os << "n,delta,R,mass\n";
        for (const SweepRow& r : rep.rows) {
            if (!r.ok()) continue;
            for (std::size_t ri = 0; ri < rep.config.r_list.size(); ++ri)
                os << r.n << ',' << format_double(r.delta) << ','
                   << format_double(rep.config.r_list[ri]) << ','
                   << format_double(r.exterior_mass[ri]) << '\n';
        }
    }
    {
        std::ofstream os(dir + "/residual.csv");
        os << "n,delta,residual_defect,twoscale_residual\n";
        for (const SweepRow& r : rep.rows) {
            if (!r.ok()) continue;
            os << r.n << ',' << format_double(r.delta) << ',' << format_double(r.residual_defect)
               << ',' << format_double(r.twoscale_residual) << '\n';
        }
    }
    {
        std::ofstream os(dir + "/A0.csv");
        os << "a11,a12,a21,a22,asym_defect,m,M\n";
        os << format_double(rep.A0.a11) << ',' << format_double(rep.A0.a12) << ','
           << format_double(rep.A0.a12) << ',' << format_double(rep.A0.a22) << ','
           << format_double(rep.cell_asym_defect) << ',' << format_double(rep.config.material.m)
           << ',' << format_double(rep.config.material.M) << '\n';
    }

    std::ofstream os(dir + "/summary.txt");
    if (rep.rows.empty()) {
        os << "no runs\n";
        return;
    }
    os << "sweep summary (degree " << rep.config.degree << ", material "
       << rep.config.material.name << ")\n";
    for (const SweepRow& r : rep.rows) {
        os << "  n=" << r.n << " delta=" << format_double(r.delta);
        if (r.ok())
            os << " eps=" << format_double(r.epsilon) << " energy=" << format_double(r.energy)
               << " vortices=" << r.vortex_degrees.size() << " sum_degree=" << r.sum_degree << "\n";
        else
            os << " ERROR: " << r.error << "\n";
    }
    os << "verdicts:\n";
    os << "  exterior-mass-bounded (ratio <= " << format_double(rep.config.mass_ratio_ceiling)
       << "): " << verdict(rep.masses_bounded) << "\n";
    os << "  vortex-degrees-stable: " << verdict(rep.degrees_stable) << "\n";
    os << "  degree-sum-equals-d: " << verdict(rep.degrees_sum_ok) << "\n";
    os << "  residual-non-increasing (slack " << format_double(rep.config.residual_slack)
       << "): " << verdict(rep.residual_trend_ok) << "\n";
    os << "  two-scale-residual-decreasing: " << verdict(rep.twoscale_trend_ok) << "\n";
    for (const std::string& f : rep.trend_flags) os << "  flag: " << f << "\n";
    os << "overall: " << verdict(rep.all_ok()) << "\n";
}

ConvergenceReport report_from_rows(const ExperimentConfig& config) {
    const std::string path = config.out_dir + "/sweep_rows.csv";
    std::ifstream is(path);
    if (!is) throw Error("report: cannot open " + path + " (run the sweep first)");
    ConvergenceReport rep;
    rep.config = config;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) cols.push_back(item);
        const std::size_t nr = config.r_list.size();
        if (cols.size() != 17 + nr) throw Error("report: malformed row in " + path);
        SweepRow r;
        r.n = std::stoul(cols[0]);
        r.delta = std::stod(cols[1]);
        r.epsilon = std::stod(cols[2]);
        r.energy = std::stod(cols[3]);
        r.dirichlet = std::stod(cols[4]);
        r.potential = std::stod(cols[5]);
        r.potential_term = std::stod(cols[6]);
        r.max_modulus = std::stod(cols[7]);
        r.iterations = std::stoul(cols[8]);
        const std::size_t nv = std::stoul(cols[9]);
        if (cols[10] != "-") {
            std::stringstream ds(cols[10]);
            std::string deg;
            while (std::getline(ds, deg, ';'))
                r.vortex_degrees.emplace_back(Vec2{}, std::stoi(deg));
        }
        if (r.vortex_degrees.size() != nv) throw Error("report: inconsistent vortex count");
        r.sum_degree = std::stoi(cols[11]);
        r.lambda_ratio = std::stod(cols[12]);
        for (std::size_t ri = 0; ri < nr; ++ri) r.exterior_mass.push_back(std::stod(cols[13 + ri]));
        r.residual_defect = std::stod(cols[13 + nr]);
        r.twoscale_residual = std::stod(cols[14 + nr]);
        r.field_file = cols[15 + nr] == "-" ? "" : cols[15 + nr];
        r.error = cols[16 + nr] == "-" ? "" : cols[16 + nr];
        rep.rows.push_back(std::move(r));
    }
    // A0 from the saved table when present
    std::ifstream a0(config.out_dir + "/A0.csv");
    if (a0) {
        std::getline(a0, line);
        if (std::getline(a0, line)) {
            std::stringstream ss(line);
            std::string item;
            std::vector<double> vals;
            while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
            if (vals.size() >= 5) {
                rep.A0 = {vals[0], vals[1], vals[3]};
                rep.cell_asym_defect = vals[4];
            }
        }
    }
    compute_verdicts(rep);
    return rep;
}

}  // namespace homogl
