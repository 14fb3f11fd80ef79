#include "homogl/vortex.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace homogl {

namespace {

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

}  // namespace

int winding_number(const ComplexField& u, Vec2 center, double radius, double* defect_out) {
    if (!(radius > 0.0)) throw Error("winding_number: radius must be positive");
    const double h = std::min(u.grid.hx, u.grid.hy);
    const std::size_t L = std::max<std::size_t>(64, std::size_t(std::ceil(4.0 * M_PI * radius / h)));
    std::vector<Complex> samples(L);
    for (std::size_t k = 0; k < L; ++k) {
        const double th = 2.0 * M_PI * double(k) / double(L);
        const Vec2 p{center.x + radius * std::cos(th), center.y + radius * std::sin(th)};
        samples[k] = bilinear(u, p);
        if (std::abs(samples[k]) < 0.25)
            throw Error("winding_number: |u| < 1/4 on the loop, phase ill-defined");
    }
    double defect = 0.0;
    const int w = winding_of_samples(samples, &defect);
    if (defect_out) *defect_out = defect;
    if (defect > 0.05)
        throw Error("winding_number: phase increment defect " + std::to_string(defect) +
                    " exceeds 0.05, loop under-resolved");
    return w;
}

VortexSet detect_bad_disks(const ComplexField& u, double epsilon, double threshold) {
    const Grid2D& g = u.grid;
    if (g.periodic_x || g.periodic_y) throw Error("detect_bad_disks: expects the bounded domain grid");
    VortexSet vs;
    vs.epsilon = epsilon;
    vs.threshold = threshold;

    std::vector<std::uint8_t> bad(g.size(), 0), seen(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) bad[k] = std::abs(u.v[k]) < threshold ? 1 : 0;

    for (std::size_t j0 = 0; j0 < g.ny; ++j0) {
        for (std::size_t i0 = 0; i0 < g.nx; ++i0) {
            const std::size_t k0 = g.idx(i0, j0);
            if (!bad[k0] || seen[k0]) continue;
            // flood fill one component
            std::vector<std::pair<std::size_t, std::size_t>> comp;
            std::deque<std::pair<std::size_t, std::size_t>> queue{{i0, j0}};
            seen[k0] = 1;
            bool touches_boundary = false;
            while (!queue.empty()) {
                auto [i, j] = queue.front();
                queue.pop_front();
                comp.emplace_back(i, j);
                if (g.on_boundary(i, j)) touches_boundary = true;
                const long di[4] = {1, -1, 0, 0};
                const long dj[4] = {0, 0, 1, -1};
                for (int t = 0; t < 4; ++t) {
                    const long in = long(i) + di[t], jn = long(j) + dj[t];
                    if (in < 0 || jn < 0 || in >= long(g.nx) || jn >= long(g.ny)) continue;
                    const std::size_t kn = g.idx(std::size_t(in), std::size_t(jn));
                    if (bad[kn] && !seen[kn]) {
                        seen[kn] = 1;
                        queue.emplace_back(std::size_t(in), std::size_t(jn));
                    }
                }
            }
            if (touches_boundary)
                throw Error("detect_bad_disks: bad set touches the domain boundary");

            Vortex v;
            double wsum = 0.0;
            for (auto [i, j] : comp) {
                const double w = 1.0 - std::abs(u.at(i, j));
                v.center.x += w * g.x(i);
                v.center.y += w * g.y(j);
                wsum += w;
            }
            v.center = (1.0 / wsum) * v.center;
            for (auto [i, j] : comp)
                v.radius = std::max(v.radius, norm(g.node(i, j) - v.center));
            vs.vortices.push_back(v);
        }
    }

    // degrees: loop at twice the component radius, clamped inside the domain
    // and away from the other components
    for (Vortex& v : vs.vortices) {
        double rad = std::max(2.0 * v.radius, 3.0 * std::max(g.hx, g.hy));
        const double to_bx = std::min(v.center.x - g.origin.x,
                                      g.origin.x + double(g.nx - 1) * g.hx - v.center.x);
        const double to_by = std::min(v.center.y - g.origin.y,
                                      g.origin.y + double(g.ny - 1) * g.hy - v.center.y);
        rad = std::min(rad, 0.9 * std::min(to_bx, to_by));
        for (const Vortex& o : vs.vortices) {
            if (&o == &v) continue;
            const double gap = norm(o.center - v.center) - o.radius;
            if (gap > 0.0) rad = std::min(rad, 0.8 * gap);
        }
        v.degree = winding_number(u, v.center, rad);
        vs.lambda_ratio = std::max(vs.lambda_ratio, v.radius / epsilon);
    }
    return vs;
}

double masked_dirichlet_integral(const ComplexField& u, const MatrixField* A,
                                 const std::function<bool(Vec2)>& inside) {
    const Grid2D& g = u.grid;
    if (A && !A->grid.same_layout(g)) throw Error("masked_dirichlet_integral: grid mismatch");
    const double inv_hx = 1.0 / g.hx, inv_hy = 1.0 / g.hy;
    const double w = 0.25 * g.hx * g.hy;
    double E = 0.0;
    for (std::size_t j = 0; j < g.cells_y(); ++j) {
        const std::size_t jp = (j + 1 == g.ny) ? 0 : j + 1;
        for (std::size_t i = 0; i < g.cells_x(); ++i) {
            const std::size_t ip = (i + 1 == g.nx) ? 0 : i + 1;
            if (!inside(g.node(i, j)) || !inside(g.node(ip, j)) || !inside(g.node(i, jp)) ||
                !inside(g.node(ip, jp)))
                continue;
            const Complex f00 = u.at(i, j), f10 = u.at(ip, j), f01 = u.at(i, jp), f11 = u.at(ip, jp);
            const Complex dxb = (f10 - f00) * inv_hx, dxt = (f11 - f01) * inv_hx;
            const Complex dyl = (f01 - f00) * inv_hy, dyr = (f11 - f10) * inv_hy;
            const std::size_t is[4] = {i, ip, i, ip}, js[4] = {j, j, jp, jp};
            const Complex gxs[4] = {dxb, dxb, dxt, dxt}, gys[4] = {dyl, dyr, dyl, dyr};
            for (int c = 0; c < 4; ++c) {
                const Mat2 a = A ? A->at(is[c], js[c]) : Mat2{1.0, 0.0, 1.0};
                const Complex gx = gxs[c], gy = gys[c];
                const double xx = gx.real() * gx.real() + gx.imag() * gx.imag();
                const double yy = gy.real() * gy.real() + gy.imag() * gy.imag();
                const double xy = gx.real() * gy.real() + gx.imag() * gy.imag();
                E += w * (a.a11 * xx + 2.0 * a.a12 * xy + a.a22 * yy);
            }
        }
    }
    return E;
}

AnnulusComparison annulus_energy_comparison(const ComplexField& u, const MatrixField& A,
                                            Vec2 center, double r_in, double r_out) {
    if (!(0.0 < r_in && r_in < r_out)) throw Error("annulus_energy_comparison: need 0 < r_in < r_out");
    const Grid2D& g = u.grid;
    auto in_annulus = [&](Vec2 p) {
        const double r = norm(p - center);
        return r >= r_in && r <= r_out;
    };
    ComplexField v = u;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            if (!in_annulus(g.node(i, j))) continue;
            const double m = std::abs(v.at(i, j));
            if (m < 0.5)
                throw Error("annulus_energy_comparison: |u| < 1/2 on the annulus (bad disk overlap)");
            v.at(i, j) /= m;
        }
    AnnulusComparison out;
    out.energy_u = masked_dirichlet_integral(u, &A, in_annulus);
    out.energy_v = masked_dirichlet_integral(v, &A, in_annulus);
    out.gap = out.energy_v - out.energy_u;
    return out;
}

}  // namespace homogl
