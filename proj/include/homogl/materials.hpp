#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "homogl/fields.hpp"

namespace homogl {
namespace materials {

/// A = c * Id. Constant fields are allowed to have m == M.
Material constant(double c);

/// A(y) = (base + amp * sin(2 pi y1)) * Id, Z²-periodic, spectrum [base-|amp|, base+|amp|].
Material laminate(double base, double amp);

/// A(y) = (base + amp * sin(2 pi y1) sin(2 pi y2)) * Id.
Material checkerboard(double base, double amp);

/// Eigenvalues fixed at (lam1, lam2), eigenframe rotated by the smooth periodic
/// angle phi(y) = phi0 + phi_amp * sin(2 pi y1) sin(2 pi y2). Carries genuine
/// off-diagonal entries; spectrum is exactly [min(lam), max(lam)].
Material rotating(double lam1, double lam2, double phi0, double phi_amp);

/// Seeded smooth random SPD field with spectrum certified inside [m, M]:
/// pointwise eigenvalues m + (M-m) * s_i(y) with s_i in [0,1] built from
/// low-order Fourier modes, eigenframe angle likewise.
Material random_spd(double m, double M, std::uint64_t seed);

/// Builds a material from flat key=value parameters:
///   material = constant|laminate|checkerboard|rotating|random
///   mat_base, mat_amp, mat_lam1, mat_lam2, mat_phi0, mat_phi_amp, mat_m, mat_M, mat_seed
Material from_params(const std::map<std::string, std::string>& kv);

}  // namespace materials
}  // namespace homogl
