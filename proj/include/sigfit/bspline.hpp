#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sigfit {

/// Value of the order-m uniform B-spline with knots {-m*d, ..., -d, 0}.
/// Support is (-m*d, 0]; the order-1 case is the indicator of (-d, 0].
/// Cox-de Boor recursion, definitional form used by tests; hot paths use
/// uniform_bspline_block below.
inline double bspline_value(int m, double d, double x) {
    if (m < 1) throw std::invalid_argument("bspline_value: order must be >= 1");
    if (d <= 0.0) throw std::invalid_argument("bspline_value: knot spacing must be positive");
    if (x <= -m * d || x > 0.0) return 0.0;
    // b[j] holds B_{j,r} on knots t_j = (j - m)*d, j = 0..m.
    std::vector<double> b(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        const double tj = (j - m) * d;
        const double tj1 = (j + 1 - m) * d;
        b[static_cast<std::size_t>(j)] = (tj < x && x <= tj1) ? 1.0 : 0.0;
    }
    for (int r = 2; r <= m; ++r) {
        for (int j = 0; j + r <= m; ++j) {
            const double tj = (j - m) * d;
            const double w1 = (x - tj) / ((r - 1) * d);
            const double w2 = ((j + r - m) * d - x) / ((r - 1) * d);
            b[static_cast<std::size_t>(j)] =
                w1 * b[static_cast<std::size_t>(j)] + w2 * b[static_cast<std::size_t>(j + 1)];
        }
    }
    return b[0];
}

/// Number of shifts B(x - i*d), i = 1..N_d, that meet [0,1]: N_d = 1/d + m - 1.
inline int basis_count(double d, int m) {
    if (d <= 0.0) throw std::invalid_argument("basis_count: knot spacing must be positive");
    const double inv = 1.0 / d;
    const double r = std::round(inv);
    if (std::abs(inv - r) > 1e-9)
        throw std::invalid_argument("basis_count: 1/d must be an integer");
    return static_cast<int>(r) + m - 1;
}

/// All m shifts of the uniform family that are nonzero at x, in one pass.
/// Shift i has support ((i-m)*d, i*d); the nonzero ones at x are
/// first_shift .. first_shift+m-1 with first_shift = floor(x/d)+1.
struct BsplineBlock {
    int first_shift = 0;
    double v[16];  // order <= 16 is plenty
};

inline BsplineBlock uniform_bspline_block(int m, double d, double x) {
    if (m < 1 || m > 16) throw std::invalid_argument("uniform_bspline_block: order out of range");
    BsplineBlock blk;
    const std::int64_t mu = static_cast<std::int64_t>(std::floor(x / d));
    blk.first_shift = static_cast<int>(mu + 1);
    double left[16], right[16];
    blk.v[0] = 1.0;
    for (int j = 1; j < m; ++j) {
        left[j] = x - (mu + 1 - j) * d;
        right[j] = (mu + j) * d - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = blk.v[r] / (right[r + 1] + left[j - r]);
            blk.v[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        blk.v[j] = saved;
    }
    return blk;
}

/// B-spline basis over an arbitrary nondecreasing knot vector (bsplvb).
/// Returns values of the p basis functions N_{mu-p+1..mu} at x, where
/// knots[mu] <= x < knots[mu+1].
inline void bspline_basis_at(const std::vector<double>& knots, int p, double x,
                             std::int64_t mu, double* vals) {
    double left[16], right[16];
    vals[0] = 1.0;
    for (int j = 1; j < p; ++j) {
        left[j] = x - knots[static_cast<std::size_t>(mu + 1 - j)];
        right[j] = knots[static_cast<std::size_t>(mu + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        vals[j] = saved;
    }
}

/// Interpolating spline of order p through values at strictly increasing
/// sites; knots by de Boor averaging with clamped ends, so the collocation
/// matrix is nonsingular (Schoenberg-Whitney). The factorization is reused
/// across many data vectors on the same sites.
class InterpSpline1D {
public:
    InterpSpline1D() = default;

    InterpSpline1D(std::vector<double> sites, int order) : sites_(std::move(sites)), p_(order) {
        const std::int64_t ns = static_cast<std::int64_t>(sites_.size());
        if (p_ < 2 || p_ > 16) throw std::invalid_argument("InterpSpline1D: order out of range");
        if (ns < p_) throw std::invalid_argument("InterpSpline1D: need at least `order` sites");
        knots_.assign(static_cast<std::size_t>(ns + p_), 0.0);
        for (int j = 0; j < p_; ++j) {
            knots_[static_cast<std::size_t>(j)] = sites_.front();
            knots_[static_cast<std::size_t>(ns + j)] = sites_.back();
        }
        for (std::int64_t j = 1; j <= ns - p_; ++j) {
            double s = 0.0;
            for (int q = 0; q < p_ - 1; ++q) s += sites_[static_cast<std::size_t>(j + q)];
            knots_[static_cast<std::size_t>(p_ - 1 + j)] = s / (p_ - 1);
        }
        Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(ns, ns);
        double vals[16];
        for (std::int64_t r = 0; r < ns; ++r) {
            const std::int64_t mu = find_span(sites_[static_cast<std::size_t>(r)]);
            bspline_basis_at(knots_, p_, sites_[static_cast<std::size_t>(r)], mu, vals);
            for (int q = 0; q < p_; ++q) colloc(r, mu - p_ + 1 + q) = vals[q];
        }
        lu_.compute(colloc);
    }

    int order() const { return p_; }
    std::int64_t size() const { return static_cast<std::int64_t>(sites_.size()); }
    const std::vector<double>& sites() const { return sites_; }

    Eigen::VectorXd fit(const Eigen::Ref<const Eigen::VectorXd>& values) const {
        return lu_.solve(values);
    }

    double eval(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double x) const {
        double vals[16];
        const std::int64_t mu = find_span(x);
        bspline_basis_at(knots_, p_, x, mu, vals);
        double s = 0.0;
        for (int q = 0; q < p_; ++q) s += coeffs[mu - p_ + 1 + q] * vals[q];
        return s;
    }

    /// Span index and the p basis values at x (for tensor evaluation).
    void basis_block(double x, std::int64_t& first, double* vals) const {
        const std::int64_t mu = find_span(x);
        bspline_basis_at(knots_, p_, x, mu, vals);
        first = mu - p_ + 1;
    }

private:
    std::int64_t find_span(double x) const {
        const std::int64_t ns = static_cast<std::int64_t>(sites_.size());
        if (x <= sites_.front()) return p_ - 1;
        if (x >= sites_.back()) return ns - 1;
        std::int64_t lo = p_ - 1, hi = ns - 1;
        while (lo < hi) {
            const std::int64_t mid = (lo + hi + 1) / 2;
            if (knots_[static_cast<std::size_t>(mid)] <= x) lo = mid;
            else hi = mid - 1;
        }
        return lo;
    }

    std::vector<double> sites_;
    std::vector<double> knots_;
    int p_ = 4;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace sigfit
