#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "sigfit/tensor.hpp"

namespace sigfit {

using Point = std::array<double, 3>;

/// Uniform grid on [0,1]^dim: nodes at i*h for 0 <= i <= N with h = 1/(N-1),
/// extended by `pad` layers of exact zeros on every side.
struct GridSpec {
    int dim = 1;
    int N = 0;    ///< largest node index per axis (N+1 nodes: 0..N)
    int pad = 1;

    GridSpec() = default;
    GridSpec(int dim_, int N_, int pad_) : dim(dim_), N(N_), pad(pad_) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1, 2 or 3");
        if (N < 2) throw std::invalid_argument("GridSpec: N must be >= 2");
        if (pad < 1) throw std::invalid_argument("GridSpec: pad must be >= 1");
    }

    double h() const { return 1.0 / (N - 1); }
    int interior_count() const { return N + 1; }           ///< nodes per axis
    std::int64_t padded_extent() const { return N + 2 * static_cast<std::int64_t>(pad) + 1; }
    double x_max() const { return N * h(); }               ///< last node coordinate

    bool operator==(const GridSpec& o) const { return dim == o.dim && N == o.N && pad == o.pad; }
};

/// Padding demand of a signature stencil: forward k-th differences reach k,
/// the discrete biharmonic reaches 2, per-axis m-th differences reach m.
/// A caller may request extra layers for display; the result is the max.
inline int pad_width_for(int stencil_reach, int display_pad = 0) {
    if (stencil_reach < 1) throw std::invalid_argument("pad_width_for: stencil reach must be >= 1");
    return std::max(stencil_reach, std::max(display_pad, 1));
}

/// Scalar field sampled on a padded uniform grid. Immutable by convention
/// after construction; all values with any index outside [0,N] are zero.
class GridFunction {
public:
    GridFunction() = default;

    explicit GridFunction(const GridSpec& spec)
        : spec_(spec),
          values_(spec.dim, {spec.padded_extent(), spec.padded_extent(), spec.padded_extent()}) {}

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    int N() const { return spec_.N; }
    int pad() const { return spec_.pad; }
    double h() const { return spec_.h(); }

    const Tensor& tensor() const { return values_; }
    Tensor& tensor() { return values_; }

    /// Grid-indexed access, indices in [-pad, N+pad] per used axis.
    double operator()(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        return values_(i + spec_.pad, dim() >= 2 ? j + spec_.pad : 0,
                       dim() >= 3 ? k + spec_.pad : 0);
    }
    double& operator()(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) {
        return values_(i + spec_.pad, dim() >= 2 ? j + spec_.pad : 0,
                       dim() >= 3 ? k + spec_.pad : 0);
    }

    bool is_interior_index(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        if (i < 0 || i > spec_.N) return false;
        if (dim() >= 2 && (j < 0 || j > spec_.N)) return false;
        if (dim() >= 3 && (k < 0 || k > spec_.N)) return false;
        return true;
    }

    Point node(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        const double hh = h();
        return {i * hh, dim() >= 2 ? j * hh : 0.0, dim() >= 3 ? k * hh : 0.0};
    }

    /// Visit interior nodes in row-major (x slowest) order.
    template <typename F>
    void for_each_interior(F&& f) const {
        const int n = spec_.N;
        const std::int64_t jmax = dim() >= 2 ? n : 0;
        const std::int64_t kmax = dim() >= 3 ? n : 0;
        for (std::int64_t i = 0; i <= n; ++i)
            for (std::int64_t j = 0; j <= jmax; ++j)
                for (std::int64_t k = 0; k <= kmax; ++k) f(i, j, k);
    }

    std::int64_t interior_size() const {
        std::int64_t s = spec_.N + 1;
        std::int64_t r = s;
        for (int a = 1; a < dim(); ++a) r *= s;
        return r;
    }

private:
    GridSpec spec_;
    Tensor values_;
};

/// Fill a GridFunction from a pointwise evaluator; padding stays zero.
inline GridFunction sample_field(const GridSpec& spec,
                                 const std::function<double(const Point&)>& f) {
    GridFunction g(spec);
    g.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        g(i, j, k) = f(g.node(i, j, k));
    });
    return g;
}

}  // namespace sigfit
