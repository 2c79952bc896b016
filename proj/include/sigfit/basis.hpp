#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sigfit/bspline.hpp"
#include "sigfit/chebyshev.hpp"
#include "sigfit/grid.hpp"
#include "sigfit/tensor.hpp"

namespace sigfit {

enum class BasisKind { bspline_tensor, chebyshev_tensor };

/// Indexed tensor-product family over [0,1]^dim: either uniform B-spline
/// shifts i = 1..N_d per axis (support ((i-m)d, i*d)), or Chebyshev products
/// of per-axis degree 0..n. Element indices are flattened with the x factor
/// slowest, matching the fit's column ordering.
class TensorBasis {
public:
    static TensorBasis bspline(int dim, int m, double d) {
        TensorBasis b;
        b.kind_ = BasisKind::bspline_tensor;
        b.dim_ = dim;
        b.m_ = m;
        b.d_ = d;
        b.per_axis_ = basis_count(d, m);
        return b;
    }

    static TensorBasis chebyshev(int dim, int degree) {
        if (degree < 0) throw std::invalid_argument("TensorBasis: degree must be >= 0");
        TensorBasis b;
        b.kind_ = BasisKind::chebyshev_tensor;
        b.dim_ = dim;
        b.degree_ = degree;
        b.per_axis_ = degree + 1;
        return b;
    }

    BasisKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int per_axis() const { return per_axis_; }
    int spline_order() const { return m_; }
    double knot_spacing() const { return d_; }
    int degree() const { return degree_; }

    /// Order for zone widths and padding heuristics: m for splines, n+1 for
    /// Chebyshev.
    int order() const { return kind_ == BasisKind::bspline_tensor ? m_ : degree_ + 1; }

    std::int64_t size() const {
        std::int64_t s = per_axis_;
        for (int a = 1; a < dim_; ++a) s *= per_axis_;
        return s;
    }

    std::array<int, 3> element_multi_index(std::int64_t flat) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = dim_ - 1; a >= 0; --a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % per_axis_);
            flat /= per_axis_;
        }
        return idx;  // 0-based per axis
    }

    /// Value of one element at a point (definitional path, used by tests and
    /// point evaluation of fitted expansions goes through eval_sparse).
    double eval_one(std::int64_t flat, const Point& p) const {
        const auto idx = element_multi_index(flat);
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) {
            if (kind_ == BasisKind::bspline_tensor) {
                v *= bspline_value(m_, d_, p[static_cast<std::size_t>(a)] -
                                               (idx[static_cast<std::size_t>(a)] + 1) * d_);
            } else {
                double t[64];
                chebyshev_values(degree_, p[static_cast<std::size_t>(a)], t);
                v *= t[idx[static_cast<std::size_t>(a)]];
            }
        }
        return v;
    }

    /// Nonzero elements at a point as (flat index, value) pairs. For splines
    /// only the m^dim local shifts appear; for Chebyshev all elements do.
    void eval_sparse(const Point& p, std::vector<std::pair<std::int64_t, double>>& out) const {
        out.clear();
        if (kind_ == BasisKind::bspline_tensor) {
            BsplineBlock blk[3];
            for (int a = 0; a < dim_; ++a)
                blk[a] = uniform_bspline_block(m_, d_, p[static_cast<std::size_t>(a)]);
            const int reps[3] = {m_, dim_ >= 2 ? m_ : 1, dim_ >= 3 ? m_ : 1};
            for (int qa = 0; qa < reps[0]; ++qa) {
                const int ia = blk[0].first_shift + qa;
                if (ia < 1 || ia > per_axis_ || blk[0].v[qa] == 0.0) continue;
                for (int qb = 0; qb < reps[1]; ++qb) {
                    int ib = 1;
                    double vb = 1.0;
                    if (dim_ >= 2) {
                        ib = blk[1].first_shift + qb;
                        vb = blk[1].v[qb];
                        if (ib < 1 || ib > per_axis_ || vb == 0.0) continue;
                    }
                    for (int qc = 0; qc < reps[2]; ++qc) {
                        int ic = 1;
                        double vc = 1.0;
                        if (dim_ >= 3) {
                            ic = blk[2].first_shift + qc;
                            vc = blk[2].v[qc];
                            if (ic < 1 || ic > per_axis_ || vc == 0.0) continue;
                        }
                        std::int64_t flat = ia - 1;
                        if (dim_ >= 2) flat = flat * per_axis_ + (ib - 1);
                        if (dim_ >= 3) flat = flat * per_axis_ + (ic - 1);
                        out.emplace_back(flat, blk[0].v[qa] * vb * vc);
                    }
                }
            }
        } else {
            double t[3][64];
            for (int a = 0; a < dim_; ++a)
                chebyshev_values(degree_, p[static_cast<std::size_t>(a)], t[a]);
            std::int64_t flat = 0;
            const int na = per_axis_;
            for (int ia = 0; ia < na; ++ia) {
                const double va = t[0][ia];
                if (dim_ == 1) {
                    out.emplace_back(flat++, va);
                    continue;
                }
                for (int ib = 0; ib < na; ++ib) {
                    const double vb = va * t[1][ib];
                    if (dim_ == 2) {
                        out.emplace_back(flat++, vb);
                        continue;
                    }
                    for (int ic = 0; ic < na; ++ic) out.emplace_back(flat++, vb * t[2][ic]);
                }
            }
        }
    }

    /// Per-axis factor values at the grid nodes 0..N (rows: axis index
    /// 0-based, cols: node). Nodes are identical on every axis.
    Eigen::MatrixXd axis_node_table(const GridSpec& grid) const {
        const int nn = grid.N + 1;
        Eigen::MatrixXd tab(per_axis_, nn);
        const double h = grid.h();
        for (int node = 0; node < nn; ++node) {
            const double x = node * h;
            if (kind_ == BasisKind::bspline_tensor) {
                for (int i = 1; i <= per_axis_; ++i)
                    tab(i - 1, node) = bspline_value(m_, d_, x - i * d_);
            } else {
                double t[64];
                chebyshev_values(degree_, x, t);
                for (int i = 0; i < per_axis_; ++i) tab(i, node) = t[i];
            }
        }
        return tab;
    }

    /// Node-index range [lo, hi] where axis factor `idx0` (0-based) can be
    /// nonzero; the full range for Chebyshev.
    std::pair<int, int> axis_support_nodes(int idx0, const GridSpec& grid) const {
        if (kind_ == BasisKind::chebyshev_tensor) return {0, grid.N};
        const double h = grid.h();
        const int shift = idx0 + 1;
        const double lo = (shift - m_) * d_, hi = shift * d_;
        int nlo = static_cast<int>(std::ceil(lo / h - 1e-12));
        int nhi = static_cast<int>(std::floor(hi / h + 1e-12));
        nlo = std::max(nlo, 0);
        nhi = std::min(nhi, grid.N);
        return {nlo, nhi};
    }

private:
    BasisKind kind_ = BasisKind::bspline_tensor;
    int dim_ = 1;
    int m_ = 0;
    double d_ = 0.0;
    int degree_ = -1;
    int per_axis_ = 0;
};

/// A basis restricted to one region of a grid labeling: column (r, i, j[,l])
/// holds the element values at nodes labeled r and exact zeros everywhere
/// else (identically zero columns are legal and are what the diagnostics
/// count). Columns are materialized on demand.
class RestrictedBasis {
public:
    RestrictedBasis(TensorBasis base, GridSpec grid, std::shared_ptr<const LabelTensor> labels,
                    int region)
        : base_(std::move(base)),
          grid_(grid),
          labels_(std::move(labels)),
          region_(region),
          table_(base_.axis_node_table(grid)) {
        if (!labels_ || labels_->dim() != base_.dim())
            throw std::invalid_argument("RestrictedBasis: labeling does not cover the grid");
    }

    const TensorBasis& base() const { return base_; }
    int region() const { return region_; }
    std::int64_t column_count() const { return base_.size(); }

    /// Write element `flat` restricted to this region into `out` (padded
    /// grid function; padding and off-region nodes stay zero).
    void materialize_column(std::int64_t flat, GridFunction& out) const {
        std::fill(out.tensor().data().begin(), out.tensor().data().end(), 0.0);
        const auto idx = base_.element_multi_index(flat);
        const int dim = base_.dim();
        const auto [alo, ahi] = base_.axis_support_nodes(idx[0], grid_);
        const auto [blo, bhi] =
            dim >= 2 ? base_.axis_support_nodes(idx[1], grid_) : std::pair<int, int>{0, 0};
        const auto [clo, chi] =
            dim >= 3 ? base_.axis_support_nodes(idx[2], grid_) : std::pair<int, int>{0, 0};
        for (int i = alo; i <= ahi; ++i) {
            const double va = table_(idx[0], i);
            if (va == 0.0) continue;
            for (int j = blo; j <= bhi; ++j) {
                const double vb = dim >= 2 ? va * table_(idx[1], j) : va;
                if (vb == 0.0) continue;
                for (int k = clo; k <= chi; ++k) {
                    if ((*labels_)(i, j, k) != region_) continue;
                    const double vc = dim >= 3 ? vb * table_(idx[2], k) : vb;
                    out(i, j, k) = vc;
                }
            }
        }
    }

    bool column_is_zero(std::int64_t flat) const {
        const auto idx = base_.element_multi_index(flat);
        const int dim = base_.dim();
        const auto [alo, ahi] = base_.axis_support_nodes(idx[0], grid_);
        const auto [blo, bhi] =
            dim >= 2 ? base_.axis_support_nodes(idx[1], grid_) : std::pair<int, int>{0, 0};
        const auto [clo, chi] =
            dim >= 3 ? base_.axis_support_nodes(idx[2], grid_) : std::pair<int, int>{0, 0};
        for (int i = alo; i <= ahi; ++i) {
            if (table_(idx[0], i) == 0.0) continue;
            for (int j = blo; j <= bhi; ++j) {
                if (dim >= 2 && table_(idx[1], j) == 0.0) continue;
                for (int k = clo; k <= chi; ++k) {
                    if (dim >= 3 && table_(idx[2], k) == 0.0) continue;
                    if ((*labels_)(i, j, k) == region_) return false;
                }
            }
        }
        return true;
    }

    std::int64_t zero_column_count() const {
        std::int64_t z = 0;
        for (std::int64_t c = 0; c < column_count(); ++c)
            if (column_is_zero(c)) ++z;
        return z;
    }

private:
    TensorBasis base_;
    GridSpec grid_;
    std::shared_ptr<const LabelTensor> labels_;
    int region_;
    Eigen::MatrixXd table_;
};

inline RestrictedBasis restrict_basis(const TensorBasis& base, const GridSpec& grid,
                                      std::shared_ptr<const LabelTensor> labels, int region) {
    return RestrictedBasis(base, grid, std::move(labels), region);
}

}  // namespace sigfit
