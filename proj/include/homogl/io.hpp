#pragma once

#include <string>
#include <vector>

#include "homogl/fields.hpp"

namespace homogl {

/// Raw contents of a binary field file: magic "HGL1", nx, ny (u64 LE), h,
/// origin.x, origin.y (f64 LE), component count (u64 LE), then row-major f64
/// payload, components interleaved per node.
struct FieldFile {
    std::uint64_t nx = 0;
    std::uint64_t ny = 0;
    double h = 0.0;
    Vec2 origin{};
    std::uint64_t components = 0;
    std::vector<double> data;
};

void write_field(const std::string& path, const FieldFile& f);
FieldFile read_field(const std::string& path);

void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const ComplexField& f);
void write_field(const std::string& path, const MatrixField& f);

/// The file format carries no periodicity flags; the caller supplies them.
ScalarField read_scalar_field(const std::string& path, bool per_x = false, bool per_y = false);
ComplexField read_complex_field(const std::string& path, bool per_x = false, bool per_y = false);

/// CSV export, one node per row, row-major: header "x,y,v" or "x,y,re,im".
void write_csv(const std::string& path, const ScalarField& f);
void write_csv(const std::string& path, const ComplexField& f);

/// Deterministic shortest round-trip formatting for doubles (%.17g trimmed).
std::string format_double(double x);

}  // namespace homogl
