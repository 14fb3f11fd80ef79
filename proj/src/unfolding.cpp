#include "homogl/unfolding.hpp"

#include <algorithm>
#include <cmath>

namespace homogl {

namespace {

struct DomainBox {
    double x0, x1, y0, y1;
};

DomainBox box_of(const Grid2D& g) {
    if (g.periodic_x || g.periodic_y) throw Error("unfold: expects the bounded domain grid");
    return {g.origin.x, g.origin.x + double(g.nx - 1) * g.hx, g.origin.y,
            g.origin.y + double(g.ny - 1) * g.hy};
}

/// Integer cell indices z with delta*[z, z+1)^2 strictly inside the open box.
std::vector<std::pair<long, long>> contained_cells(const DomainBox& b, double delta) {
    if (!(delta > 0.0)) throw Error("unfold: delta must be positive");
    if (delta > std::min(b.x1 - b.x0, b.y1 - b.y0)) throw Error("unfold: delta larger than the domain");
    const double tol = 1e-12 * delta;
    std::vector<std::pair<long, long>> cells;
    const long zx0 = long(std::floor(b.x0 / delta)) - 1, zx1 = long(std::ceil(b.x1 / delta)) + 1;
    const long zy0 = long(std::floor(b.y0 / delta)) - 1, zy1 = long(std::ceil(b.y1 / delta)) + 1;
    for (long zy = zy0; zy <= zy1; ++zy) {
        const double ay = delta * double(zy);
        if (!(ay - b.y0 > tol) || !(b.y1 - (ay + delta) > -tol)) continue;
        for (long zx = zx0; zx <= zx1; ++zx) {
            const double ax = delta * double(zx);
            if (!(ax - b.x0 > tol) || !(b.x1 - (ax + delta) > -tol)) continue;
            cells.emplace_back(zx, zy);
        }
    }
    return cells;
}

Complex bilinear(const ComplexField& u, Vec2 p) {
    const Grid2D& g = u.grid;
    double fx = (p.x - g.origin.x) / g.hx;
    double fy = (p.y - g.origin.y) / g.hy;
    fx = std::clamp(fx, 0.0, double(g.nx - 1));
    fy = std::clamp(fy, 0.0, double(g.ny - 1));
    const std::size_t i = std::min(std::size_t(fx), g.nx - 2);
    const std::size_t j = std::min(std::size_t(fy), g.ny - 2);
    const double ax = fx - double(i), ay = fy - double(j);
    return (1 - ax) * (1 - ay) * u.at(i, j) + ax * (1 - ay) * u.at(i + 1, j) +
           (1 - ax) * ay * u.at(i, j + 1) + ax * ay * u.at(i + 1, j + 1);
}

/// 4th-order finite difference along one axis of a micro block (spacing hs),
/// one-sided at the edges.
void fd4(const std::vector<Complex>& val, std::size_t n, bool along_x, double hs,
         std::vector<Complex>& out) {
    out.assign(val.size(), Complex(0.0, 0.0));
    auto at = [&](std::size_t a, std::size_t b) -> Complex {
        return along_x ? val[b * n + a] : val[a * n + b];
    };
    auto put = [&](std::size_t a, std::size_t b, Complex v) {
        if (along_x) out[b * n + a] = v;
        else out[a * n + b] = v;
    };
    const double c = 1.0 / (12.0 * hs);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t a = 0; a < n; ++a) {
            Complex v;
            if (a >= 2 && a + 2 < n) {
                v = c * (at(a - 2, b) - 8.0 * at(a - 1, b) + 8.0 * at(a + 1, b) - at(a + 2, b));
            } else if (a == 0) {
                v = c * (-25.0 * at(0, b) + 48.0 * at(1, b) - 36.0 * at(2, b) + 16.0 * at(3, b) -
                         3.0 * at(4, b));
            } else if (a == 1) {
                v = c * (-3.0 * at(0, b) - 10.0 * at(1, b) + 18.0 * at(2, b) - 6.0 * at(3, b) +
                         at(4, b));
            } else if (a + 2 == n) {
                v = -c * (-3.0 * at(n - 1, b) - 10.0 * at(n - 2, b) + 18.0 * at(n - 3, b) -
                          6.0 * at(n - 4, b) + at(n - 5, b));
            } else {  // a + 1 == n
                v = -c * (-25.0 * at(n - 1, b) + 48.0 * at(n - 2, b) - 36.0 * at(n - 3, b) +
                          16.0 * at(n - 4, b) - 3.0 * at(n - 5, b));
            }
            put(a, b, v);
        }
    }
}

GradientIdentityReport identity_defect(const UnfoldedField& Uf, const UnfoldedField& Ugx,
                                       const UnfoldedField& Ugy) {
    GradientIdentityReport rep;
    rep.cells = Uf.cells.size();
    const std::size_t n = Uf.micro_n;
    const double hs = 1.0 / double(n);
    std::vector<Complex> dx, dy;
    double sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < Uf.cells.size(); ++c) {
        fd4(Uf.cells[c].values, n, true, hs, dx);
        fd4(Uf.cells[c].values, n, false, hs, dy);
        for (std::size_t k = 0; k < n * n; ++k) {
            const Complex ex = dx[k] - Uf.delta * Ugx.cells[c].values[k];
            const Complex ey = dy[k] - Uf.delta * Ugy.cells[c].values[k];
            const double m = std::max(std::abs(ex), std::abs(ey));
            rep.defect_max = std::max(rep.defect_max, m);
            sum2 += std::norm(ex) + std::norm(ey);
            ++count;
        }
    }
    rep.defect_l2 = count ? std::sqrt(sum2 / double(count)) : 0.0;
    return rep;
}

}  // namespace

double UnfoldedField::unfolded_mass() const {
    double s = 0.0;
    const double cell_area = delta * delta;
    for (const Cell& c : cells) {
        double m = 0.0;
        for (const Complex& z : c.values) m += std::norm(z);
        s += cell_area * m / double(c.values.size());
    }
    return s;
}

UnfoldedField unfold(const ComplexField& f, double delta, std::size_t micro_n) {
    if (micro_n < 2) throw Error("unfold: micro resolution must be at least 2");
    const Grid2D& g = f.grid;
    const DomainBox b = box_of(g);
    UnfoldedField uf;
    uf.delta = delta;
    uf.micro_n = micro_n;

    const double ratio = delta / g.hx;
    const bool aligned = g.hx == g.hy && std::abs(ratio - std::round(ratio)) < 1e-9 * ratio &&
                         std::size_t(std::llround(ratio)) == micro_n;
    uf.exact_samples = aligned;

    for (auto [zx, zy] : contained_cells(b, delta)) {
        UnfoldedField::Cell cell;
        cell.zx = zx;
        cell.zy = zy;
        cell.anchor = {delta * double(zx), delta * double(zy)};
        cell.values.resize(micro_n * micro_n);
        if (aligned) {
            const long i0 = std::llround((cell.anchor.x - g.origin.x) / g.hx);
            const long j0 = std::llround((cell.anchor.y - g.origin.y) / g.hy);
            for (std::size_t ky = 0; ky < micro_n; ++ky)
                for (std::size_t kx = 0; kx < micro_n; ++kx)
                    cell.values[ky * micro_n + kx] =
                        f.at(std::size_t(i0) + kx, std::size_t(j0) + ky);
        } else {
            for (std::size_t ky = 0; ky < micro_n; ++ky)
                for (std::size_t kx = 0; kx < micro_n; ++kx) {
                    const Vec2 p{cell.anchor.x + delta * double(kx) / double(micro_n),
                                 cell.anchor.y + delta * double(ky) / double(micro_n)};
                    cell.values[ky * micro_n + kx] = bilinear(f, p);
                }
        }
        uf.cells.push_back(std::move(cell));
    }
    return uf;
}

UnfoldedField unfold_closure(const Grid2D& domain, const std::function<Complex(Vec2)>& f,
                             double delta, std::size_t micro_n) {
    if (micro_n < 2) throw Error("unfold_closure: micro resolution must be at least 2");
    const DomainBox b = box_of(domain);
    UnfoldedField uf;
    uf.delta = delta;
    uf.micro_n = micro_n;
    uf.exact_samples = true;
    for (auto [zx, zy] : contained_cells(b, delta)) {
        UnfoldedField::Cell cell;
        cell.zx = zx;
        cell.zy = zy;
        cell.anchor = {delta * double(zx), delta * double(zy)};
        cell.values.resize(micro_n * micro_n);
        for (std::size_t ky = 0; ky < micro_n; ++ky)
            for (std::size_t kx = 0; kx < micro_n; ++kx)
                cell.values[ky * micro_n + kx] =
                    f(Vec2{cell.anchor.x + delta * double(kx) / double(micro_n),
                           cell.anchor.y + delta * double(ky) / double(micro_n)});
        uf.cells.push_back(std::move(cell));
    }
    return uf;
}

double covered_mass(const ComplexField& f, const UnfoldedField& uf) {
    const Grid2D& g = f.grid;
    const double tol = 1e-9 * g.hx;
    double s = 0.0;
    for (const auto& cell : uf.cells) {
        for (std::size_t j = 0; j < g.ny; ++j) {
            const double y = g.y(j);
            if (y < cell.anchor.y - tol || y >= cell.anchor.y + uf.delta - tol) continue;
            for (std::size_t i = 0; i < g.nx; ++i) {
                const double x = g.x(i);
                if (x < cell.anchor.x - tol || x >= cell.anchor.x + uf.delta - tol) continue;
                s += std::norm(f.at(i, j)) * g.hx * g.hy;
            }
        }
    }
    return s;
}

GradientIdentityReport unfold_gradient_identity_check(const Grid2D& domain,
                                                      const std::function<Complex(Vec2)>& f,
                                                      const std::function<Complex(Vec2)>& dfx,
                                                      const std::function<Complex(Vec2)>& dfy,
                                                      double delta, std::size_t micro_n) {
    if (micro_n < 8) throw Error("unfold_gradient_identity_check: micro resolution must be >= 8");
    const UnfoldedField Uf = unfold_closure(domain, f, delta, micro_n);
    const UnfoldedField Ugx = unfold_closure(domain, dfx, delta, micro_n);
    const UnfoldedField Ugy = unfold_closure(domain, dfy, delta, micro_n);
    return identity_defect(Uf, Ugx, Ugy);
}

void discrete_gradient(const ComplexField& f, ComplexField& dfx, ComplexField& dfy) {
    const Grid2D& g = f.grid;
    dfx = ComplexField(g);
    dfy = ComplexField(g);
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            Complex gx, gy;
            if (i == 0 && !g.periodic_x) gx = (f.at(1, j) - f.at(0, j)) / g.hx;
            else if (i + 1 == g.nx && !g.periodic_x) gx = (f.at(i, j) - f.at(i - 1, j)) / g.hx;
            else {
                const std::size_t im = i == 0 ? g.nx - 1 : i - 1;
                const std::size_t ip = i + 1 == g.nx ? 0 : i + 1;
                gx = (f.at(ip, j) - f.at(im, j)) / (2.0 * g.hx);
            }
            if (j == 0 && !g.periodic_y) gy = (f.at(i, 1) - f.at(i, 0)) / g.hy;
            else if (j + 1 == g.ny && !g.periodic_y) gy = (f.at(i, j) - f.at(i, j - 1)) / g.hy;
            else {
                const std::size_t jm = j == 0 ? g.ny - 1 : j - 1;
                const std::size_t jp = j + 1 == g.ny ? 0 : j + 1;
                gy = (f.at(i, jp) - f.at(i, jm)) / (2.0 * g.hy);
            }
            dfx.at(i, j) = gx;
            dfy.at(i, j) = gy;
        }
}

GradientIdentityReport unfold_gradient_identity_check(const ComplexField& f, double delta,
                                                      std::size_t micro_n) {
    if (micro_n < 8) throw Error("unfold_gradient_identity_check: micro resolution must be >= 8");
    ComplexField dfx, dfy;
    discrete_gradient(f, dfx, dfy);
    const UnfoldedField Uf = unfold(f, delta, micro_n);
    const UnfoldedField Ugx = unfold(dfx, delta, micro_n);
    const UnfoldedField Ugy = unfold(dfy, delta, micro_n);
    return identity_defect(Uf, Ugx, Ugy);
}

double TwoScaleFit::relative_residual(const std::function<bool(Vec2)>& keep) const {
    double r2 = 0.0, d2 = 0.0;
    for (const TwoScaleCellFit& c : cells) {
        if (c.flagged) continue;
        if (keep && !keep(c.anchor)) continue;
        r2 += c.residual * c.residual;
        d2 += c.data_norm * c.data_norm;
    }
    return d2 > 0.0 ? std::sqrt(r2 / d2) : 0.0;
}

TwoScaleFit extract_two_scale_pair(const ComplexField& u, double delta, const CellSolution& cell) {
    const Grid2D& cg = cell.chi1.grid;
    const std::size_t n = cg.nx;
    TwoScaleFit fit;
    fit.delta = delta;
    fit.micro_n = n;

    // corrector gradient basis at cell nodes (periodic central differences)
    std::vector<double> bx1(n * n), by1(n * n), bx2(n * n), by2(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
            const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
            const std::size_t k = j * n + i;
            bx1[k] = (cell.chi1.at(ip, j) - cell.chi1.at(im, j)) / (2.0 * cg.hx);
            by1[k] = (cell.chi1.at(i, jp) - cell.chi1.at(i, jm)) / (2.0 * cg.hy);
            bx2[k] = (cell.chi2.at(ip, j) - cell.chi2.at(im, j)) / (2.0 * cg.hx);
            by2[k] = (cell.chi2.at(i, jp) - cell.chi2.at(i, jm)) / (2.0 * cg.hy);
        }

    ComplexField dux, duy;
    discrete_gradient(u, dux, duy);
    const UnfoldedField Tx = unfold(dux, delta, n);
    const UnfoldedField Ty = unfold(duy, delta, n);

    const double nn = double(n * n);
    // shared normal-matrix blocks (basis identical for every cell)
    double Sbx1 = 0, Sbx2 = 0, Sby1 = 0, Sby2 = 0, B11 = 0, B12 = 0, B22 = 0;
    for (std::size_t k = 0; k < n * n; ++k) {
        Sbx1 += bx1[k];
        Sbx2 += bx2[k];
        Sby1 += by1[k];
        Sby2 += by2[k];
        B11 += bx1[k] * bx1[k] + by1[k] * by1[k];
        B12 += bx1[k] * bx2[k] + by1[k] * by2[k];
        B22 += bx2[k] * bx2[k] + by2[k] * by2[k];
    }
    const bool drop1 = B11 <= 1e-24 * nn;
    const bool drop2 = B22 <= 1e-24 * nn;

    for (std::size_t c = 0; c < Tx.cells.size(); ++c) {
        TwoScaleCellFit row;
        row.zx = Tx.cells[c].zx;
        row.zy = Tx.cells[c].zy;
        row.anchor = Tx.cells[c].anchor;
        const auto& vx = Tx.cells[c].values;
        const auto& vy = Ty.cells[c].values;

        Complex r0{}, r1{}, r2{}, r3{};
        double d2 = 0.0;
        for (std::size_t k = 0; k < n * n; ++k) {
            r0 += vx[k];
            r1 += vy[k];
            r2 += bx1[k] * vx[k] + by1[k] * vy[k];
            r3 += bx2[k] * vx[k] + by2[k] * vy[k];
            d2 += std::norm(vx[k]) + std::norm(vy[k]);
        }
        row.data_norm = std::sqrt(d2);

        // normal equations in the (G1, G2, c1, c2) order, dropped columns removed
        std::size_t cols[4];
        std::size_t m = 0;
        cols[m++] = 0;
        cols[m++] = 1;
        if (!drop1) cols[m++] = 2;
        if (!drop2) cols[m++] = 3;
        double N[4][4] = {{nn, 0, Sbx1, Sbx2}, {0, nn, Sby1, Sby2},
                          {Sbx1, Sby1, B11, B12}, {Sbx2, Sby2, B12, B22}};
        Complex rhs[4] = {r0, r1, r2, r3};
        double A[4][4];
        Complex b[4];
        for (std::size_t a = 0; a < m; ++a) {
            b[a] = rhs[cols[a]];
            for (std::size_t q = 0; q < m; ++q) A[a][q] = N[cols[a]][cols[q]];
        }
        // Gaussian elimination with partial pivoting
        bool singular = false;
        std::size_t perm[4] = {0, 1, 2, 3};
        for (std::size_t p = 0; p < m && !singular; ++p) {
            std::size_t best = p;
            for (std::size_t q = p + 1; q < m; ++q)
                if (std::abs(A[q][p]) > std::abs(A[best][p])) best = q;
            if (best != p) {
                for (std::size_t q = 0; q < m; ++q) std::swap(A[p][q], A[best][q]);
                std::swap(b[p], b[best]);
                std::swap(perm[p], perm[best]);
            }
            if (std::abs(A[p][p]) <= 1e-12 * nn) {
                singular = true;
                break;
            }
            for (std::size_t q = p + 1; q < m; ++q) {
                const double fac = A[q][p] / A[p][p];
                for (std::size_t t = p; t < m; ++t) A[q][t] -= fac * A[p][t];
                b[q] -= fac * b[p];
            }
        }
        if (singular) {
            row.flagged = true;
            fit.cells.push_back(row);
            continue;
        }
        Complex sol[4] = {};
        for (std::size_t p = m; p-- > 0;) {
            Complex s = b[p];
            for (std::size_t q = p + 1; q < m; ++q) s -= A[p][q] * sol[q];
            sol[p] = s / A[p][p];
        }
        (void)perm;
        Complex full[4] = {};
        for (std::size_t a = 0; a < m; ++a) full[cols[a]] = sol[a];
        row.G1 = full[0];
        row.G2 = full[1];
        row.coeff1 = full[2];
        row.coeff2 = full[3];

        double res2 = 0.0;
        for (std::size_t k = 0; k < n * n; ++k) {
            const Complex mx = row.G1 + row.coeff1 * bx1[k] + row.coeff2 * bx2[k];
            const Complex my = row.G2 + row.coeff1 * by1[k] + row.coeff2 * by2[k];
            res2 += std::norm(vx[k] - mx) + std::norm(vy[k] - my);
        }
        row.residual = std::sqrt(res2);
        fit.cells.push_back(row);
    }
    return fit;
}

}  // namespace homogl
