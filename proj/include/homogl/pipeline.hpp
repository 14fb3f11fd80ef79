#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homogl/cell_homog.hpp"
#include "homogl/gl_solver.hpp"
#include "homogl/unfolding.hpp"
#include "homogl/vortex.hpp"

namespace homogl {

/// Flat key = value configuration for a (delta_n, eps_n) sweep.
struct ExperimentConfig {
    std::map<std::string, std::string> raw;

    Material material;
    int degree = 1;
    std::vector<double> deltas;                  // strictly decreasing
    std::vector<std::size_t> grids;              // one per delta
    std::vector<std::vector<double>> eps_candidates;  // one list per delta
    std::size_t cell_n = 128;
    double tol_cg = 1e-10;
    double tol_el = 2e-4;
    std::vector<double> r_list{0.15, 0.25, 0.35};
    double mass_ratio_ceiling = 3.0;
    double residual_slack = 1.2;   // non-increasing within 20%
    double bump_width = 0.18;
    double bump_spacing = 0.25;
    std::string out_dir = "out";
    bool write_fields = true;

    static ExperimentConfig parse(const std::map<std::string, std::string>& kv);
    static std::map<std::string, std::string> read_key_values(const std::string& path);
    /// Validates the Lemma-2.3 preconditions: deltas strictly decreasing, every
    /// candidate >= 4h and < delta^2 / n. Throws on violation.
    void validate() const;
};

struct ResidualCheck {
    double max_defect = 0.0;           // max over bumps of |pairing| / bump norm
    double max_wedge_defect = 0.0;     // same for the wedge formulation
    double max_agreement_error = 0.0;  // |complex-pairing wedge - wedge pairing|
    std::size_t bumps = 0;
};

/// Weak residual of -div(A0 grad v) = v (grad v . A0 grad v) for v = u/|u|
/// against compactly supported bumps away from the exclusion disks and the
/// boundary. Throws when the exclusions leave no room for any bump or when
/// |u| < 1/2 outside the exclusion disks.
ResidualCheck homogenized_residual_check(const ComplexField& u, Mat2 A0, const VortexSet& vortices,
                                         double R, double bump_width, double bump_spacing);

struct SweepRow {
    std::size_t n = 0;  // 1-based
    double delta = 0.0;
    double epsilon = 0.0;
    double energy = 0.0, dirichlet = 0.0, potential = 0.0;
    double potential_term = 0.0;
    double max_modulus = 0.0;
    std::size_t iterations = 0;
    std::vector<std::pair<Vec2, int>> vortex_degrees;  // center, degree
    double lambda_ratio = 0.0;
    int sum_degree = 0;
    std::vector<double> exterior_mass;   // one per R in r_list
    double residual_defect = 0.0;
    double twoscale_residual = 0.0;
    std::string field_file;
    std::string error;                   // empty on success

    bool ok() const { return error.empty(); }
};

struct ConvergenceReport {
    ExperimentConfig config;
    Mat2 A0{};
    double cell_asym_defect = 0.0;
    std::vector<SweepRow> rows;

    bool masses_bounded = false;      // (a) max/min ratio per R below the ceiling
    bool degrees_stable = false;      // (b) degree multiset identical across n
    bool degrees_sum_ok = false;      // (c) sum kappa = d in every successful row
    bool residual_trend_ok = false;   // defect non-increasing within the slack
    bool twoscale_trend_ok = false;   // fit residual decreasing in n
    std::vector<std::string> trend_flags;  // non-fatal anomalies, reported not failed

    bool all_ok() const {
        if (rows.empty()) return false;
        for (const SweepRow& r : rows)
            if (!r.ok()) return false;
        return masses_bounded && degrees_stable && degrees_sum_ok && residual_trend_ok &&
               twoscale_trend_ok;
    }
};

ConvergenceReport run_sweep(const ExperimentConfig& config);

/// Writes the CSV tables and the human-readable summary into config.out_dir.
/// Deterministic: identical config and inputs give byte-identical files.
void full_report(const ConvergenceReport& report);

/// Recomputes verdicts and rewrites the summary from a previously written
/// sweep_rows.csv (the `report` subcommand).
ConvergenceReport report_from_rows(const ExperimentConfig& config);

}  // namespace homogl
