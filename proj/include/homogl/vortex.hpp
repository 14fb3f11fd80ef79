#pragma once

#include <functional>
#include <vector>

#include "homogl/fields.hpp"

namespace homogl {

struct Vortex {
    Vec2 center{};
    double radius = 0.0;
    int degree = 0;
};

/// Bad disks of a converged minimizer: |u| >= threshold outside the union of
/// the stored disks.
struct VortexSet {
    std::vector<Vortex> vortices;
    double epsilon = 0.0;
    double threshold = 0.5;
    double lambda_ratio = 0.0;  // max component radius / epsilon

    int total_degree() const {
        int s = 0;
        for (const Vortex& v : vortices) s += v.degree;
        return s;
    }
};

/// Connected components (4-connectivity) of {|u| < threshold}. Component
/// centers are (1-|u|)-weighted centroids; radius is the max node distance to
/// the center; the degree is read on a loop of twice the component radius.
/// A bad set touching the domain boundary throws (the Dirichlet data has
/// modulus one, so this signals an unconverged field).
VortexSet detect_bad_disks(const ComplexField& u, double epsilon, double threshold = 0.5);

/// Phase winding of u around the circle (center, radius): principal-branch
/// increments over a bilinearly interpolated loop. Throws if the interpolated
/// modulus drops below 1/4 anywhere on the loop or if the total deviates from
/// an integer by more than 0.05.
int winding_number(const ComplexField& u, Vec2 center, double radius, double* defect = nullptr);

struct AnnulusComparison {
    double energy_u = 0.0;   // int_annulus grad u . A grad u
    double energy_v = 0.0;   // same for v = u/|u|
    double gap = 0.0;        // energy_v - energy_u
};

/// Both Dirichlet integrals over the annulus r_in <= |x - center| <= r_out.
/// Requires |u| >= 1/2 on the annulus nodes (throws when a bad disk overlaps).
AnnulusComparison annulus_energy_comparison(const ComplexField& u, const MatrixField& A,
                                            Vec2 center, double r_in, double r_out);

/// Corner-quadrature Dirichlet integral of grad u . A grad u restricted to
/// cells whose four nodes satisfy the predicate. A == nullptr means identity.
double masked_dirichlet_integral(const ComplexField& u, const MatrixField* A,
                                 const std::function<bool(Vec2)>& inside);

}  // namespace homogl
