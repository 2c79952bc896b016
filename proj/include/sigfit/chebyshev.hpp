#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sigfit/grid.hpp"

namespace sigfit {

/// T_0..T_n at the mapped coordinate xi = 2x - 1 (three-term recurrence).
inline void chebyshev_values(int n, double x, double* out) {
    const double xi = 2.0 * x - 1.0;
    out[0] = 1.0;
    if (n >= 1) out[1] = xi;
    for (int q = 2; q <= n; ++q) out[q] = 2.0 * xi * out[q - 1] - out[q - 2];
}

/// Tensor products T_a(x)T_b(y)T_c(z) for per-axis degrees 0..n, flattened
/// with the x-degree slowest: idx = (a*(n+1)+b)*(n+1)+c (trailing axes
/// collapse for dim < 3).
inline std::vector<double> chebyshev_tensor_eval(int n, int dim, const Point& pt) {
    if (n < 0) throw std::invalid_argument("chebyshev_tensor_eval: degree must be >= 0");
    if (dim < 1 || dim > 3) throw std::invalid_argument("chebyshev_tensor_eval: dim out of range");
    std::vector<double> tx(static_cast<std::size_t>(n + 1)), ty, tz;
    chebyshev_values(n, pt[0], tx.data());
    if (dim >= 2) {
        ty.resize(static_cast<std::size_t>(n + 1));
        chebyshev_values(n, pt[1], ty.data());
    }
    if (dim >= 3) {
        tz.resize(static_cast<std::size_t>(n + 1));
        chebyshev_values(n, pt[2], tz.data());
    }
    std::size_t count = static_cast<std::size_t>(n + 1);
    for (int a = 1; a < dim; ++a) count *= static_cast<std::size_t>(n + 1);
    std::vector<double> out(count);
    std::size_t idx = 0;
    for (int a = 0; a <= n; ++a) {
        if (dim == 1) {
            out[idx++] = tx[static_cast<std::size_t>(a)];
            continue;
        }
        for (int b = 0; b <= n; ++b) {
            if (dim == 2) {
                out[idx++] = tx[static_cast<std::size_t>(a)] * ty[static_cast<std::size_t>(b)];
                continue;
            }
            for (int c = 0; c <= n; ++c)
                out[idx++] = tx[static_cast<std::size_t>(a)] * ty[static_cast<std::size_t>(b)] *
                             tz[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

}  // namespace sigfit
