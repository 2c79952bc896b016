#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigfit/correct.hpp"
#include "sigfit/detect.hpp"
#include "sigfit/grid.hpp"
#include "sigfit/signature.hpp"

namespace sigfit {
namespace csvio {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_hex(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double parse_hex(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);  // LF endings on every platform
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

/// Grid CSV: a `dim,N,h,pad` header naming line, the four values, then one
/// value per line over the interior in row-major (x slowest) order. Padding
/// is synthesized as zeros on read.
inline void write_grid_csv(const std::string& path, const GridFunction& g) {
    auto f = open_out(path);
    f << "dim,N,h,pad\n";
    f << g.dim() << "," << g.N() << "," << fmt(g.h()) << "," << g.pad() << "\n";
    g.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        f << fmt(g(i, j, k)) << "\n";
    });
}

inline GridFunction read_grid_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("dim,N,h,pad", 0) != 0)
        throw std::runtime_error("grid csv: missing dim,N,h,pad header: " + path);
    if (!std::getline(f, line)) throw std::runtime_error("grid csv: missing header values");
    int dim = 0, n = 0, pad = 0;
    double h = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%d", &dim, &n, &h, &pad) != 4)
        throw std::runtime_error("grid csv: malformed header values: " + line);
    GridSpec spec(dim, n, pad);
    if (std::abs(h * (n - 1) - 1.0) > 1e-12)
        throw std::runtime_error("grid csv: h*(N-1) must equal 1");
    GridFunction g(spec);
    bool bad = false;
    g.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        if (bad) return;
        if (!std::getline(f, line)) { bad = true; return; }
        g(i, j, k) = std::strtod(line.c_str(), nullptr);
    });
    if (bad) throw std::runtime_error("grid csv: fewer values than the header promises");
    return g;
}

/// Signature CSV: one header naming line, one line of shape values, then the
/// stacked component tensors in row-major order.
inline void write_signature_csv(const std::string& path, const Signature& sig) {
    auto f = open_out(path);
    f << "dim,N,pad,kind,order,components\n";
    const char* kind = sig.spec.kind == SignatureKind::forward_diff_k
                           ? "forward"
                           : (sig.spec.kind == SignatureKind::biharmonic ? "biharmonic" : "axis");
    f << sig.grid.dim << "," << sig.grid.N << "," << sig.grid.pad << "," << kind << ","
      << sig.spec.order << "," << sig.components.size() << "\n";
    for (const auto& c : sig.components)
        for (double v : c.data()) f << fmt(v) << "\n";
}

inline void write_points_csv(const std::string& path, const std::vector<Point>& pts, int dim) {
    auto f = open_out(path);
    f << (dim == 3 ? "x,y,z\n" : (dim == 2 ? "x,y\n" : "x\n"));
    for (const auto& p : pts) {
        f << fmt(p[0]);
        if (dim >= 2) f << "," << fmt(p[1]);
        if (dim >= 3) f << "," << fmt(p[2]);
        f << "\n";
    }
}

/// Error field CSV: x,y[,z],error,zone rows over the fine lattice.
inline void write_error_csv(const std::string& path, const ErrorField& field) {
    auto f = open_out(path);
    const int dim = field.base.dim;
    f << (dim == 3 ? "x,y,z,error,zone\n" : (dim == 2 ? "x,y,error,zone\n" : "x,error,zone\n"));
    const std::int64_t nn = field.nodes_per_axis;
    const double step = field.base.h() / field.fine_factor;
    const std::int64_t jmax = dim >= 2 ? nn - 1 : 0;
    const std::int64_t kmax = dim >= 3 ? nn - 1 : 0;
    std::int64_t at = 0;
    for (std::int64_t i = 0; i < nn; ++i)
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k, ++at) {
                f << fmt(i * step);
                if (dim >= 2) f << "," << fmt(j * step);
                if (dim >= 3) f << "," << fmt(k * step);
                f << "," << fmt(field.errors[static_cast<std::size_t>(at)]) << ","
                  << ErrorField::zone_name(field.zones[static_cast<std::size_t>(at)]) << "\n";
            }
}

}  // namespace csvio
}  // namespace sigfit
