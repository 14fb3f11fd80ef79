#include "homogl/materials.hpp"

#include <cmath>
#include <random>

namespace homogl {
namespace materials {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Mat2 rotated_diag(double lam1, double lam2, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    // R diag(lam1, lam2) R^T with R the rotation by phi
    return {lam1 * c * c + lam2 * s * s, (lam1 - lam2) * c * s, lam1 * s * s + lam2 * c * c};
}

double get(const std::map<std::string, std::string>& kv, const std::string& key, double dflt) {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : std::stod(it->second);
}

}  // namespace

Material constant(double c) {
    if (!(c > 0.0)) throw Error("materials::constant: need c > 0");
    Material m;
    m.name = "constant";
    m.m = c;
    m.M = c;
    m.A = [c](Vec2) { return Mat2{c, 0.0, c}; };
    return m;
}

Material laminate(double base, double amp) {
    if (!(base - std::abs(amp) > 0.0)) throw Error("materials::laminate: field not positive definite");
    Material m;
    m.name = "laminate";
    m.m = base - std::abs(amp);
    m.M = base + std::abs(amp);
    m.A = [base, amp](Vec2 y) {
        const double a = base + amp * std::sin(kTwoPi * y.x);
        return Mat2{a, 0.0, a};
    };
    return m;
}

Material checkerboard(double base, double amp) {
    if (!(base - std::abs(amp) > 0.0)) throw Error("materials::checkerboard: field not positive definite");
    Material m;
    m.name = "checkerboard";
    m.m = base - std::abs(amp);
    m.M = base + std::abs(amp);
    m.A = [base, amp](Vec2 y) {
        const double a = base + amp * std::sin(kTwoPi * y.x) * std::sin(kTwoPi * y.y);
        return Mat2{a, 0.0, a};
    };
    return m;
}

Material rotating(double lam1, double lam2, double phi0, double phi_amp) {
    if (!(std::min(lam1, lam2) > 0.0)) throw Error("materials::rotating: eigenvalues must be positive");
    Material m;
    m.name = "rotating";
    m.m = std::min(lam1, lam2);
    m.M = std::max(lam1, lam2);
    m.A = [=](Vec2 y) {
        const double phi = phi0 + phi_amp * std::sin(kTwoPi * y.x) * std::sin(kTwoPi * y.y);
        return rotated_diag(lam1, lam2, phi);
    };
    return m;
}

Material random_spd(double m_lo, double M_hi, std::uint64_t seed) {
    if (!(m_lo > 0.0 && M_hi > m_lo)) throw Error("materials::random_spd: need 0 < m < M");
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };  // in [0,1)
    // each smooth scalar s(y) = 0.5 + 0.5 sin(2pi(a y1 + b y2) + c) stays in [0,1]
    struct Mode {
        int a, b;
        double c;
    };
    auto mode = [&]() {
        return Mode{int(rng() % 5) - 2, int(rng() % 5) - 2, kTwoPi * unit()};
    };
    const Mode m1 = mode(), m2 = mode(), mphi = mode();
    const double phi_scale = kTwoPi * unit();
    Material m;
    m.name = "random";
    m.m = m_lo;
    m.M = M_hi;
    m.A = [=](Vec2 y) {
        auto s = [&y](Mode md) { return 0.5 + 0.5 * std::sin(kTwoPi * (md.a * y.x + md.b * y.y) + md.c); };
        const double lam1 = m_lo + (M_hi - m_lo) * s(m1);
        const double lam2 = m_lo + (M_hi - m_lo) * s(m2);
        const double phi = phi_scale * s(mphi);
        return rotated_diag(lam1, lam2, phi);
    };
    return m;
}

Material from_params(const std::map<std::string, std::string>& kv) {
    auto it = kv.find("material");
    if (it == kv.end()) throw Error("material parameters: missing key 'material'");
    const std::string& id = it->second;
    if (id == "constant") return constant(get(kv, "mat_base", 1.0));
    if (id == "laminate") return laminate(get(kv, "mat_base", 2.0), get(kv, "mat_amp", 1.0));
    if (id == "checkerboard") return checkerboard(get(kv, "mat_base", 2.0), get(kv, "mat_amp", 1.0));
    if (id == "rotating")
        return rotating(get(kv, "mat_lam1", 1.0), get(kv, "mat_lam2", 3.0), get(kv, "mat_phi0", 0.0),
                        get(kv, "mat_phi_amp", 1.0));
    if (id == "random")
        return random_spd(get(kv, "mat_m", 1.0), get(kv, "mat_M", 3.0),
                          std::uint64_t(get(kv, "mat_seed", 1.0)));
    throw Error("material parameters: unknown material '" + id + "'");
}

}  // namespace materials
}  // namespace homogl
