#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sigfit/grid.hpp"
#include "sigfit/tensor.hpp"

namespace sigfit {

enum class SignatureKind { forward_diff_k, biharmonic, per_axis_diff };
enum class SignatureScaling { raw, h_power };

/// Which difference operator fingerprints the data, and whether the result
/// is divided by the matching power of h. The raw form is what the fit
/// matches; the least-squares problem is scale-invariant either way.
struct SignatureSpec {
    SignatureKind kind = SignatureKind::forward_diff_k;
    int order = 5;  ///< k for forward differences, m for per-axis; 2 for biharmonic
    SignatureScaling scaling = SignatureScaling::raw;

    int stencil_reach() const {
        switch (kind) {
            case SignatureKind::forward_diff_k: return order;
            case SignatureKind::biharmonic: return 2;
            case SignatureKind::per_axis_diff: return order;
        }
        return order;
    }

    int expected_dim() const {
        switch (kind) {
            case SignatureKind::forward_diff_k: return 1;
            case SignatureKind::biharmonic: return 2;
            case SignatureKind::per_axis_diff: return 3;
        }
        return 1;
    }
};

/// Difference-operator values over the padded grid. Per-axis signatures
/// stack one tensor per axis; the flattened layout (component-major,
/// row-major within) is shared with the basis signature columns.
struct Signature {
    SignatureSpec spec;
    GridSpec grid;
    std::vector<Tensor> components;
    /// Grid index of entry 0 along each axis, per component.
    std::vector<std::array<std::int64_t, 3>> offsets;

    std::int64_t total_size() const {
        std::int64_t s = 0;
        for (const auto& c : components) s += c.size();
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& c : components) m = std::max(m, c.max_abs());
        return m;
    }

    void flatten_into(double* out) const {
        std::int64_t at = 0;
        for (const auto& c : components) {
            std::copy(c.data().begin(), c.data().end(), out + at);
            at += c.size();
        }
    }

    Eigen::VectorXd flatten() const {
        Eigen::VectorXd v(total_size());
        flatten_into(v.data());
        return v;
    }
};

namespace detail {
inline void binomial_signed(int k, double* coef) {
    // coef[j] = (-1)^(k-j) * C(k,j)
    double c = 1.0;
    for (int j = 0; j <= k; ++j) {
        coef[j] = (((k - j) % 2) ? -c : c);
        c = c * (k - j) / (j + 1);
    }
}
}  // namespace detail

/// Forward k-th differences: out[i] = sum_j (-1)^(k-j) C(k,j) in[i+j].
inline std::vector<double> forward_diff(const std::vector<double>& in, int k) {
    if (k < 1) throw std::invalid_argument("forward_diff: order must be >= 1");
    if (static_cast<std::int64_t>(in.size()) <= k)
        throw std::length_error("forward_diff: input length must exceed the order");
    double coef[32];
    detail::binomial_signed(k, coef);
    const std::int64_t n = static_cast<std::int64_t>(in.size()) - k;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j <= k; ++j) s += coef[j] * in[static_cast<std::size_t>(i + j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

/// Inverse of `forward_diff` under the convention that the reconstructed
/// sequence opens with k zeros: one cumulative-sum pass per difference
/// order. Each pass trades one order of decay for one factor of the length.
inline std::vector<double> invert_differences(const std::vector<double>& d, int k) {
    if (k < 1) throw std::invalid_argument("invert_differences: order must be >= 1");
    std::vector<double> cur = d;
    for (int step = 0; step < k; ++step) {
        std::vector<double> next(cur.size() + 1, 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] = next[i] + cur[i];
        cur = std::move(next);
    }
    return cur;
}

/// sigma_k(g): forward k-th differences of the zero-padded sample vector.
inline Signature signature_1d(const GridFunction& g, int k,
                              SignatureScaling scaling = SignatureScaling::raw) {
    if (g.dim() != 1) throw std::invalid_argument("signature_1d: grid must be 1-D");
    if (g.pad() < k) throw std::invalid_argument("signature_1d: padding below difference order");
    std::vector<double> padded(static_cast<std::size_t>(g.spec().padded_extent()));
    for (std::int64_t t = 0; t < g.spec().padded_extent(); ++t)
        padded[static_cast<std::size_t>(t)] = g.tensor()(t);
    std::vector<double> d = forward_diff(padded, k);
    if (scaling == SignatureScaling::h_power) {
        const double s = std::pow(g.h(), -k);
        for (double& v : d) v *= s;
    }
    Signature sig;
    sig.spec = {SignatureKind::forward_diff_k, k, scaling};
    sig.grid = g.spec();
    Tensor t(1, {static_cast<std::int64_t>(d.size()), 1, 1});
    t.data() = std::move(d);
    sig.components.push_back(std::move(t));
    sig.offsets.push_back({-g.pad(), 0, 0});
    return sig;
}

/// sigma(g) = discrete biharmonic of the padded samples: the 13-point
/// stencil obtained by composing two 5-point Laplacians (center 20, edge
/// neighbors -8, diagonals 2, distance-2 axial 1), unscaled by default.
inline Signature biharmonic(const GridFunction& g,
                            SignatureScaling scaling = SignatureScaling::raw) {
    if (g.dim() != 2) throw std::invalid_argument("biharmonic: grid must be 2-D");
    if (g.pad() < 2) throw std::invalid_argument("biharmonic: padding must be >= 2");
    const std::int64_t P = g.spec().padded_extent();
    const std::int64_t E = P - 4;
    Tensor out(2, {E, E, 1});
    const Tensor& v = g.tensor();
    const double scale = (scaling == SignatureScaling::h_power) ? std::pow(g.h(), -4) : 1.0;
    for (std::int64_t a = 0; a < E; ++a) {
        for (std::int64_t b = 0; b < E; ++b) {
            const std::int64_t i = a + 2, j = b + 2;  // padded-tensor center
            const double s =
                20.0 * v(i, j) -
                8.0 * (v(i - 1, j) + v(i + 1, j) + v(i, j - 1) + v(i, j + 1)) +
                2.0 * (v(i - 1, j - 1) + v(i - 1, j + 1) + v(i + 1, j - 1) + v(i + 1, j + 1)) +
                (v(i - 2, j) + v(i + 2, j) + v(i, j - 2) + v(i, j + 2));
            out(a, b) = s * scale;
        }
    }
    Signature sig;
    sig.spec = {SignatureKind::biharmonic, 2, scaling};
    sig.grid = g.spec();
    sig.components.push_back(std::move(out));
    sig.offsets.push_back({2 - g.pad(), 2 - g.pad(), 0});
    return sig;
}

/// sigma_m(g) in 3-D: m-th forward differences along each axis, applied
/// line by line to the padded data; the three tensors are stacked.
inline Signature per_axis_signature(const GridFunction& g, int m,
                                    SignatureScaling scaling = SignatureScaling::raw) {
    if (g.dim() != 3) throw std::invalid_argument("per_axis_signature: grid must be 3-D");
    if (g.pad() < m) throw std::invalid_argument("per_axis_signature: padding below order");
    const std::int64_t P = g.spec().padded_extent();
    double coef[32];
    detail::binomial_signed(m, coef);
    const double scale = (scaling == SignatureScaling::h_power) ? std::pow(g.h(), -m) : 1.0;
    Signature sig;
    sig.spec = {SignatureKind::per_axis_diff, m, scaling};
    sig.grid = g.spec();
    const Tensor& v = g.tensor();
    for (int axis = 0; axis < 3; ++axis) {
        std::array<std::int64_t, 3> ext{P, P, P};
        ext[static_cast<std::size_t>(axis)] = P - m;
        Tensor out(3, ext);
        std::array<std::int64_t, 3> step{0, 0, 0};
        step[static_cast<std::size_t>(axis)] = 1;
        for (std::int64_t a = 0; a < ext[0]; ++a)
            for (std::int64_t b = 0; b < ext[1]; ++b)
                for (std::int64_t c = 0; c < ext[2]; ++c) {
                    double s = 0.0;
                    for (int q = 0; q <= m; ++q)
                        s += coef[q] * v(a + q * step[0], b + q * step[1], c + q * step[2]);
                    out(a, b, c) = s * scale;
                }
        sig.components.push_back(std::move(out));
        sig.offsets.push_back({-g.pad(), -g.pad(), -g.pad()});
    }
    return sig;
}

/// Dispatch on the spec. The grid's padding must cover the stencil reach.
inline Signature compute_signature(const GridFunction& g, const SignatureSpec& spec) {
    switch (spec.kind) {
        case SignatureKind::forward_diff_k: return signature_1d(g, spec.order, spec.scaling);
        case SignatureKind::biharmonic: return biharmonic(g, spec.scaling);
        case SignatureKind::per_axis_diff: return per_axis_signature(g, spec.order, spec.scaling);
    }
    throw std::logic_error("compute_signature: unreachable");
}

/// Max |sigma| over 1-D entries whose difference window lies inside [0,N]
/// and stays farther than `margin` from every coordinate in `away_from`.
inline double interior_max_1d(const Signature& sig, const std::vector<double>& away_from,
                              double margin) {
    const Tensor& c = sig.components.at(0);
    const int k = sig.spec.order;
    const double h = sig.grid.h();
    double best = 0.0;
    for (std::int64_t t = 0; t < c.size(); ++t) {
        const std::int64_t i = t + sig.offsets[0][0];  // grid index of window start
        if (i < 0 || i + k > sig.grid.N) continue;
        const double lo = i * h, hi = (i + k) * h;
        bool clear = true;
        for (double x : away_from)
            if (x > lo - margin && x < hi + margin) clear = false;
        if (!clear) continue;
        best = std::max(best, std::abs(c.at_flat(t)));
    }
    return best;
}

}  // namespace sigfit
