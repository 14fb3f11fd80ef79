#include "homogl/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace homogl {

namespace {

constexpr char kMagic[4] = {'H', 'G', 'L', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = (unsigned char)((v >> (8 * k)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double x) {
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    put_u64(os, v);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw Error("read_field: truncated header");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= std::uint64_t(b[k]) << (8 * k);
    return v;
}

double get_f64(std::istream& is) {
    const std::uint64_t v = get_u64(is);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

Grid2D meta_grid(const FieldFile& f, bool per_x, bool per_y) {
    return Grid2D(f.nx, f.ny, f.origin, f.h, f.h, per_x, per_y);
}

}  // namespace

void write_field(const std::string& path, const FieldFile& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_field: cannot open " + path);
    os.write(kMagic, 4);
    put_u64(os, f.nx);
    put_u64(os, f.ny);
    put_f64(os, f.h);
    put_f64(os, f.origin.x);
    put_f64(os, f.origin.y);
    put_u64(os, f.components);
    for (double x : f.data) put_f64(os, x);
    if (!os) throw Error("write_field: write failed for " + path);
}

FieldFile read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("read_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw Error("read_field: malformed header in " + path);
    FieldFile f;
    f.nx = get_u64(is);
    f.ny = get_u64(is);
    f.h = get_f64(is);
    f.origin.x = get_f64(is);
    f.origin.y = get_f64(is);
    f.components = get_u64(is);
    if (f.nx < 3 || f.ny < 3 || f.components == 0 || f.components > 16)
        throw Error("read_field: implausible header in " + path);
    const std::uint64_t count = f.nx * f.ny * f.components;
    f.data.resize(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        unsigned char b[8];
        is.read(reinterpret_cast<char*>(b), 8);
        if (!is) throw Error("read_field: dimension mismatch, payload shorter than header promises");
        std::uint64_t v = 0;
        for (int t = 0; t < 8; ++t) v |= std::uint64_t(b[t]) << (8 * t);
        std::memcpy(&f.data[k], &v, 8);
    }
    char extra;
    if (is.read(&extra, 1)) throw Error("read_field: dimension mismatch, trailing bytes after payload");
    return f;
}

void write_field(const std::string& path, const ScalarField& f) {
    FieldFile ff;
    ff.nx = f.grid.nx;
    ff.ny = f.grid.ny;
    ff.h = f.grid.hx;
    ff.origin = f.grid.origin;
    ff.components = 1;
    ff.data = f.v;
    write_field(path, ff);
}

void write_field(const std::string& path, const ComplexField& f) {
    FieldFile ff;
    ff.nx = f.grid.nx;
    ff.ny = f.grid.ny;
    ff.h = f.grid.hx;
    ff.origin = f.grid.origin;
    ff.components = 2;
    ff.data.reserve(2 * f.v.size());
    for (const Complex& z : f.v) {
        ff.data.push_back(z.real());
        ff.data.push_back(z.imag());
    }
    write_field(path, ff);
}

void write_field(const std::string& path, const MatrixField& f) {
    FieldFile ff;
    ff.nx = f.grid.nx;
    ff.ny = f.grid.ny;
    ff.h = f.grid.hx;
    ff.origin = f.grid.origin;
    ff.components = 3;
    ff.data.reserve(3 * f.a11.size());
    for (std::size_t k = 0; k < f.a11.size(); ++k) {
        ff.data.push_back(f.a11[k]);
        ff.data.push_back(f.a12[k]);
        ff.data.push_back(f.a22[k]);
    }
    write_field(path, ff);
}

ScalarField read_scalar_field(const std::string& path, bool per_x, bool per_y) {
    const FieldFile ff = read_field(path);
    if (ff.components != 1) throw Error("read_scalar_field: expected 1 component in " + path);
    ScalarField f(meta_grid(ff, per_x, per_y));
    f.v = ff.data;
    return f;
}

ComplexField read_complex_field(const std::string& path, bool per_x, bool per_y) {
    const FieldFile ff = read_field(path);
    if (ff.components != 2) throw Error("read_complex_field: expected 2 components in " + path);
    ComplexField f(meta_grid(ff, per_x, per_y));
    for (std::size_t k = 0; k < f.v.size(); ++k) f.v[k] = Complex(ff.data[2 * k], ff.data[2 * k + 1]);
    return f;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw Error("write_csv: cannot open " + path);
    os << "x,y,v\n";
    for (std::size_t j = 0; j < f.grid.ny; ++j)
        for (std::size_t i = 0; i < f.grid.nx; ++i)
            os << format_double(f.grid.x(i)) << ',' << format_double(f.grid.y(j)) << ','
               << format_double(f.at(i, j)) << '\n';
}

void write_csv(const std::string& path, const ComplexField& f) {
    std::ofstream os(path);
    if (!os) throw Error("write_csv: cannot open " + path);
    os << "x,y,re,im\n";
    for (std::size_t j = 0; j < f.grid.ny; ++j)
        for (std::size_t i = 0; i < f.grid.nx; ++i) {
            const Complex z = f.at(i, j);
            os << format_double(f.grid.x(i)) << ',' << format_double(f.grid.y(j)) << ','
               << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
        }
}

}  // namespace homogl
