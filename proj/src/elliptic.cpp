#include "homogl/elliptic.hpp"

#include <algorithm>
#include <cmath>

#include "homogl/parallel.hpp"

namespace homogl {

namespace {

inline double energy_term(double sx, double gx) { return sx * gx; }
inline double energy_term(const Complex& sx, const Complex& gx) {
    return sx.real() * gx.real() + sx.imag() * gx.imag();
}

/// Processes cell rows [j0, j1): accumulates deposits (energy-form row sums,
/// i.e. q(f, delta_n)) into dep when non-null, returns the band's contribution
/// to q(f+xi, f+xi).
template <typename T>
double cell_band(const Grid2D& g, const MatrixField& A, const T* f, double ox, double oy, T* dep,
                 std::size_t j0, std::size_t j1) {
    const std::size_t nx = g.nx;
    const std::size_t ncx = g.cells_x();
    const double inv_hx = 1.0 / g.hx;
    const double inv_hy = 1.0 / g.hy;
    const double w = 0.25 * g.hx * g.hy;
    const double cx = w * inv_hx;
    const double cy = w * inv_hy;
    const double* a11 = A.a11.data();
    const double* a12 = A.a12.data();
    const double* a22 = A.a22.data();

    double E = 0.0;
    for (std::size_t j = j0; j < j1; ++j) {
        const std::size_t jp = (j + 1 == g.ny) ? 0 : j + 1;
        const std::size_t r0 = j * nx;
        const std::size_t r1 = jp * nx;
        for (std::size_t i = 0; i < ncx; ++i) {
            const std::size_t ip = (i + 1 == nx) ? 0 : i + 1;
            const std::size_t n00 = r0 + i, n10 = r0 + ip, n01 = r1 + i, n11 = r1 + ip;
            const T f00 = f[n00], f10 = f[n10], f01 = f[n01], f11 = f[n11];
            const T dxb = (f10 - f00) * inv_hx + ox;
            const T dxt = (f11 - f01) * inv_hx + ox;
            const T dyl = (f01 - f00) * inv_hy + oy;
            const T dyr = (f11 - f10) * inv_hy + oy;
            // corner fluxes, node matrix at each corner
            const T s0x = a11[n00] * dxb + a12[n00] * dyl, s0y = a12[n00] * dxb + a22[n00] * dyl;
            const T s1x = a11[n10] * dxb + a12[n10] * dyr, s1y = a12[n10] * dxb + a22[n10] * dyr;
            const T s2x = a11[n01] * dxt + a12[n01] * dyl, s2y = a12[n01] * dxt + a22[n01] * dyl;
            const T s3x = a11[n11] * dxt + a12[n11] * dyr, s3y = a12[n11] * dxt + a22[n11] * dyr;
            E += w * (energy_term(s0x, dxb) + energy_term(s0y, dyl) + energy_term(s1x, dxb) +
                      energy_term(s1y, dyr) + energy_term(s2x, dxt) + energy_term(s2y, dyl) +
                      energy_term(s3x, dxt) + energy_term(s3y, dyr));
            if (dep) {
                const T Xb = (s0x + s1x) * cx;
                const T Xt = (s2x + s3x) * cx;
                const T Yl = (s0y + s2y) * cy;
                const T Yr = (s1y + s3y) * cy;
                dep[n10] += Xb;
                dep[n00] -= Xb;
                dep[n11] += Xt;
                dep[n01] -= Xt;
                dep[n01] += Yl;
                dep[n00] -= Yl;
                dep[n11] += Yr;
                dep[n10] -= Yr;
            }
        }
    }
    return E;
}

constexpr std::size_t kBandRows = 48;

/// Full form pass. Deposits (if requested) and the form value in one sweep.
/// Under periodic y the wrap row writes into node row 0, so it runs after the
/// banded phases.
template <typename T>
double run_form(const Grid2D& g, const MatrixField& A, const T* f, double ox, double oy, T* dep) {
    const std::size_t ncy = g.cells_y();
    if (!dep) {
        return parallel_sum(ncy, kBandRows, [&](std::size_t b, std::size_t e) {
            return cell_band(g, A, f, ox, oy, static_cast<T*>(nullptr), b, e);
        });
    }
    const std::size_t main_rows = g.periodic_y ? ncy - 1 : ncy;
    const std::size_t nbands = (main_rows + kBandRows - 1) / kBandRows;
    std::vector<double> parts(nbands, 0.0);
    parallel_row_bands(main_rows, kBandRows, [&](std::size_t b, std::size_t e) {
        parts[b / kBandRows] = cell_band(g, A, f, ox, oy, dep, b, e);
    });
    double E = 0.0;
    for (double p : parts) E += p;
    if (g.periodic_y) E += cell_band(g, A, f, ox, oy, dep, ncy - 1, ncy);
    return E;
}

void check_grid(const Grid2D& a, const Grid2D& b, const char* who) {
    if (!a.same_layout(b)) throw Error(std::string(who) + ": field lives on a different grid");
}

}  // namespace

DivAGradOperator::DivAGradOperator(std::shared_ptr<const MatrixField> A, BC bc)
    : A_(std::move(A)), bc_(bc) {
    if (!A_) throw Error("DivAGradOperator: null matrix field");
    const Grid2D& g = A_->grid;
    switch (bc_) {
        case BC::periodic:
            if (!g.periodic_x || !g.periodic_y) throw Error("DivAGradOperator: periodic bc needs a periodic grid");
            break;
        case BC::dirichlet:
            if (g.periodic_x || g.periodic_y) throw Error("DivAGradOperator: dirichlet bc needs a bounded grid");
            break;
        case BC::neumann_x_periodic_y:
            if (g.periodic_x || !g.periodic_y)
                throw Error("DivAGradOperator: neumann_x_periodic_y needs bounded x, periodic y");
            break;
    }
}

Mat2 DivAGradOperator::edge_matrix(int axis, std::size_t i, std::size_t j) const {
    const Grid2D& g = grid();
    const std::size_t i2 = axis == 0 ? ((i + 1 == g.nx) ? 0 : i + 1) : i;
    const std::size_t j2 = axis == 0 ? j : ((j + 1 == g.ny) ? 0 : j + 1);
    return 0.5 * (A_->at(i, j) + A_->at(i2, j2));
}

double DivAGradOperator::accumulate_deposits(const ScalarField& f, Vec2 xi, std::vector<double>& out) const {
    check_grid(f.grid, grid(), "DivAGradOperator::accumulate_deposits");
    out.assign(f.v.size(), 0.0);
    return run_form(grid(), *A_, f.v.data(), xi.x, xi.y, out.data());
}

double DivAGradOperator::accumulate_deposits(const ComplexField& f, std::vector<Complex>& out) const {
    check_grid(f.grid, grid(), "DivAGradOperator::accumulate_deposits");
    out.assign(f.v.size(), Complex(0.0, 0.0));
    return run_form(grid(), *A_, f.v.data(), 0.0, 0.0, out.data());
}

ScalarField DivAGradOperator::apply(const ScalarField& f) const {
    return apply_with_offset(f, Vec2{0.0, 0.0});
}

ScalarField DivAGradOperator::apply_with_offset(const ScalarField& f, Vec2 xi) const {
    std::vector<double> dep;
    accumulate_deposits(f, xi, dep);
    const Grid2D& g = grid();
    ScalarField out(g);
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            out.v[k] = node_is_free(i, j) ? -dep[k] / g.node_volume(i, j) : f.v[k];
        }
    return out;
}

ComplexField DivAGradOperator::apply(const ComplexField& f) const {
    std::vector<Complex> dep;
    accumulate_deposits(f, dep);
    const Grid2D& g = grid();
    ComplexField out(g);
    out.boundary_mask = f.boundary_mask;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            out.v[k] = node_is_free(i, j) ? -dep[k] / g.node_volume(i, j) : f.v[k];
        }
    return out;
}

double DivAGradOperator::dirichlet_form(const ScalarField& f, Vec2 xi) const {
    check_grid(f.grid, grid(), "DivAGradOperator::dirichlet_form");
    return run_form(grid(), *A_, f.v.data(), xi.x, xi.y, static_cast<double*>(nullptr));
}

double DivAGradOperator::dirichlet_form(const ComplexField& f) const {
    check_grid(f.grid, grid(), "DivAGradOperator::dirichlet_form");
    return run_form(grid(), *A_, f.v.data(), 0.0, 0.0, static_cast<Complex*>(nullptr));
}

Vec2 DivAGradOperator::flux_mean(const ScalarField& f, Vec2 xi) const {
    check_grid(f.grid, grid(), "DivAGradOperator::flux_mean");
    const Grid2D& g = grid();
    const MatrixField& A = *A_;
    const std::size_t nx = g.nx;
    const std::size_t ncx = g.cells_x();
    const double inv_hx = 1.0 / g.hx, inv_hy = 1.0 / g.hy;
    const double w = 0.25 * g.hx * g.hy;
    double fx = 0.0, fy = 0.0, area = 0.0;
    for (std::size_t j = 0; j < g.cells_y(); ++j) {
        const std::size_t jp = (j + 1 == g.ny) ? 0 : j + 1;
        const std::size_t r0 = j * nx, r1 = jp * nx;
        for (std::size_t i = 0; i < ncx; ++i) {
            const std::size_t ip = (i + 1 == nx) ? 0 : i + 1;
            const std::size_t n00 = r0 + i, n10 = r0 + ip, n01 = r1 + i, n11 = r1 + ip;
            const double f00 = f.v[n00], f10 = f.v[n10], f01 = f.v[n01], f11 = f.v[n11];
            const double dxb = (f10 - f00) * inv_hx + xi.x;
            const double dxt = (f11 - f01) * inv_hx + xi.x;
            const double dyl = (f01 - f00) * inv_hy + xi.y;
            const double dyr = (f11 - f10) * inv_hy + xi.y;
            const std::size_t cn[4] = {n00, n10, n01, n11};
            const double gxs[4] = {dxb, dxb, dxt, dxt};
            const double gys[4] = {dyl, dyr, dyl, dyr};
            for (int c = 0; c < 4; ++c) {
                fx += w * (A.a11[cn[c]] * gxs[c] + A.a12[cn[c]] * gys[c]);
                fy += w * (A.a12[cn[c]] * gxs[c] + A.a22[cn[c]] * gys[c]);
            }
            area += 4.0 * w;
        }
    }
    return {fx / area, fy / area};
}

double inner_vol(const Grid2D& g, const std::vector<double>& a, const std::vector<double>& b) {
    return parallel_sum(g.ny, 8, [&](std::size_t j0, std::size_t j1) {
        double s = 0.0;
        for (std::size_t j = j0; j < j1; ++j)
            for (std::size_t i = 0; i < g.nx; ++i) {
                const std::size_t k = g.idx(i, j);
                s += a[k] * b[k] * g.node_volume(i, j);
            }
        return s;
    });
}

double norm_vol(const Grid2D& g, const std::vector<double>& a) {
    return std::sqrt(inner_vol(g, a, a));
}

ScalarField solve_cg(const DivAGradOperator& op, const ScalarField& rhs, const ScalarField* initial,
                     const CGOptions& opt, CGInfo* info) {
    const Grid2D& g = op.grid();
    check_grid(rhs.grid, g, "solve_cg");
    if (initial) check_grid(initial->grid, g, "solve_cg");
    if (!(opt.tol > 0.0)) throw Error("solve_cg: tol must be positive");

    const std::size_t n = g.size();
    std::vector<std::uint8_t> free_mask(n, 1);
    std::vector<double> vol(n, 0.0);
    double total_free_vol = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            vol[k] = g.node_volume(i, j);
            free_mask[k] = op.node_is_free(i, j) ? 1 : 0;
            if (free_mask[k]) total_free_vol += vol[k];
        }

    ScalarField x = initial ? *initial : ScalarField(g);

    auto project = [&](std::vector<double>& a) {
        double mean = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (free_mask[k]) mean += a[k] * vol[k];
        mean /= total_free_vol;
        for (std::size_t k = 0; k < n; ++k)
            if (free_mask[k]) a[k] -= mean;
    };

    // K = -L restricted to free nodes (SPD); masked input expected for p.
    ScalarField tmp(g);
    std::vector<double> dep;
    auto apply_K = [&](const std::vector<double>& in, std::vector<double>& out) {
        tmp.v = in;
        op.accumulate_deposits(tmp, Vec2{0.0, 0.0}, dep);
        out.resize(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = free_mask[k] ? dep[k] / vol[k] : 0.0;
    };

    const double rhs_norm = [&] {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (free_mask[k]) s += rhs.v[k] * rhs.v[k] * vol[k];
        return std::sqrt(s);
    }();

    if (opt.zero_mean) {
        double mean_mass = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (free_mask[k]) mean_mass += rhs.v[k] * vol[k];
        const double mean_norm = std::abs(mean_mass) / std::sqrt(total_free_vol);
        // the absolute floor keeps round-off-level right-hand sides admissible
        if (mean_norm > opt.tol * rhs_norm + 1e-12)
            throw Error("solve_cg: rhs mean " + std::to_string(mean_norm) +
                        " exceeds tolerance, system is incompatible with the zero-mean constraint");
        project(x.v);
    }

    std::vector<double> r(n, 0.0), q;
    apply_K(x.v, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = free_mask[k] ? -rhs.v[k] - q[k] : 0.0;
    if (opt.zero_mean) project(r);

    auto dot_vol = [&](const std::vector<double>& a, const std::vector<double>& b) {
        return parallel_sum(g.ny, 16, [&](std::size_t j0, std::size_t j1) {
            double s = 0.0;
            for (std::size_t k = j0 * g.nx; k < j1 * g.nx; ++k) s += a[k] * b[k] * vol[k];
            return s;
        });
    };

    double denom = rhs_norm;
    const double r0_norm = std::sqrt(dot_vol(r, r));
    if (denom == 0.0) denom = r0_norm;
    if (denom == 0.0) {
        if (info) *info = {0, 0.0};
        return x;
    }
    const double target = opt.tol * denom;

    auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        if (!opt.diag_precond) {
            zz = rr;
            return;
        }
        zz.resize(n);
        for (std::size_t k = 0; k < n; ++k) zz[k] = free_mask[k] ? rr[k] * opt.diag_precond->v[k] : 0.0;
    };

    std::vector<double> z, p;
    precondition(r, z);
    p = z;
    double rz = dot_vol(r, z);
    double rnorm = r0_norm;

    std::size_t it = 0;
    for (; it < opt.max_iter && rnorm > target; ++it) {
        apply_K(p, q);
        const double pq = dot_vol(p, q);
        if (!(pq > 0.0)) {
            // kernel direction: for compatible systems this means convergence stalled at round-off
            break;
        }
        const double alpha = rz / pq;
        for (std::size_t k = 0; k < n; ++k) {
            x.v[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        if (opt.zero_mean) {
            project(x.v);
            project(r);
        }
        rnorm = std::sqrt(dot_vol(r, r));
        if (rnorm <= target) {
            ++it;
            break;
        }
        precondition(r, z);
        const double rz_new = dot_vol(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }

    if (rnorm > target)
        throw SolveError("solve_cg: no convergence in " + std::to_string(opt.max_iter) + " iterations",
                         rnorm / denom);
    if (info) *info = {it, rnorm / denom};
    return x;
}

}  // namespace homogl
