#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sigfit/bspline.hpp"
#include "sigfit/fit.hpp"
#include "sigfit/grid.hpp"
#include "sigfit/parallel.hpp"
#include "sigfit/testfunctions.hpp"

namespace sigfit {

enum class CorrectionKind { tensor_spline_interp, quasi_interp };

/// Smooth operator applied to the first-stage residual: either interpolating
/// tensor-product splines of a given order, or local Lagrange
/// quasi-interpolation reproducing polynomials up to a given degree.
struct CorrectionOperator {
    CorrectionKind kind = CorrectionKind::tensor_spline_interp;
    int spline_order = 4;  ///< p for the interpolating splines
    int degree = 3;        ///< reproduced degree l for quasi-interpolation

    static CorrectionOperator spline(int order) {
        if (order < 2) throw std::invalid_argument("CorrectionOperator: spline order must be >= 2");
        return {CorrectionKind::tensor_spline_interp, order, order - 1};
    }
    static CorrectionOperator quasi(int degree) {
        if (degree < 1) throw std::invalid_argument("CorrectionOperator: degree must be >= 1");
        return {CorrectionKind::quasi_interp, degree + 1, degree};
    }

    int reproduced_degree() const {
        return kind == CorrectionKind::tensor_spline_interp ? spline_order - 1 : degree;
    }
    int support_width() const {
        return kind == CorrectionKind::tensor_spline_interp ? spline_order : degree + 1;
    }
};

/// Evaluable smooth approximation of grid data built on the interior nodes
/// only; evaluation is meant for [0, N*h]^dim.
class CorrectionInterpolant {
public:
    CorrectionInterpolant() = default;

    static CorrectionInterpolant build(const GridFunction& e, const CorrectionOperator& op) {
        CorrectionInterpolant c;
        c.op_ = op;
        c.grid_ = e.spec();
        const std::int64_t nn = e.N() + 1;
        c.values_ = Tensor(e.dim(), {nn, nn, nn});
        e.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
            c.values_(i, j, k) = e(i, j, k);
        });
        if (op.kind == CorrectionKind::tensor_spline_interp) {
            std::vector<double> sites(static_cast<std::size_t>(nn));
            for (std::int64_t i = 0; i < nn; ++i)
                sites[static_cast<std::size_t>(i)] = static_cast<double>(i) * e.h();
            c.spline_ = std::make_shared<InterpSpline1D>(std::move(sites), op.spline_order);
            c.fit_axes();
        }
        return c;
    }

    double eval(const Point& p) const {
        return op_.kind == CorrectionKind::tensor_spline_interp ? eval_spline(p) : eval_quasi(p);
    }

    const CorrectionOperator& op() const { return op_; }
    const GridSpec& grid() const { return grid_; }

private:
    /// Separable interpolation: replace values by spline coefficients one
    /// axis at a time, reusing the single factorized collocation system.
    void fit_axes() {
        const std::int64_t nn = values_.extent(0);
        Eigen::VectorXd line(nn);
        for (int axis = 0; axis < grid_.dim; ++axis) {
            const std::int64_t e1 = values_.extent((axis + 1) % 3);
            const std::int64_t e2 = values_.extent((axis + 2) % 3);
            for (std::int64_t a = 0; a < e1; ++a) {
                for (std::int64_t b = 0; b < e2; ++b) {
                    for (std::int64_t t = 0; t < nn; ++t) line[t] = values_.at_flat(lin(axis, t, a, b));
                    const Eigen::VectorXd cf = spline_->fit(line);
                    for (std::int64_t t = 0; t < nn; ++t) values_.at_flat(lin(axis, t, a, b)) = cf[t];
                }
            }
        }
    }

    std::int64_t lin(int axis, std::int64_t t, std::int64_t a, std::int64_t b) const {
        std::int64_t idx[3];
        idx[axis] = t;
        idx[(axis + 1) % 3] = a;
        idx[(axis + 2) % 3] = b;
        return values_.flat(idx[0], idx[1], idx[2]);
    }

    double eval_spline(const Point& p) const {
        std::int64_t first[3] = {0, 0, 0};
        double w[3][16];
        const int pp = op_.spline_order;
        for (int a = 0; a < grid_.dim; ++a)
            spline_->basis_block(p[static_cast<std::size_t>(a)], first[a], w[a]);
        double s = 0.0;
        const int rb = grid_.dim >= 2 ? pp : 1;
        const int rc = grid_.dim >= 3 ? pp : 1;
        for (int qa = 0; qa < pp; ++qa)
            for (int qb = 0; qb < rb; ++qb)
                for (int qc = 0; qc < rc; ++qc)
                    s += w[0][qa] * (grid_.dim >= 2 ? w[1][qb] : 1.0) *
                         (grid_.dim >= 3 ? w[2][qc] : 1.0) *
                         values_(first[0] + qa, grid_.dim >= 2 ? first[1] + qb : 0,
                                 grid_.dim >= 3 ? first[2] + qc : 0);
        return s;
    }

    /// Local Lagrange cardinal weights: the stencil of l+1 nodes centered on
    /// the evaluation cell, clamped inside the data range. Interpolatory at
    /// nodes and exact on polynomials of degree <= l.
    void lagrange_weights(double x, std::int64_t& start, double* w) const {
        const int l = op_.degree;
        const double h = grid_.h();
        const std::int64_t n = grid_.N;
        std::int64_t cell = static_cast<std::int64_t>(std::floor(x / h));
        cell = std::clamp<std::int64_t>(cell, 0, n - 1);
        start = std::clamp<std::int64_t>(cell - (l - 1) / 2, 0, n - l);
        for (int q = 0; q <= l; ++q) {
            double num = 1.0, den = 1.0;
            const double xq = static_cast<double>(start + q) * h;
            for (int r = 0; r <= l; ++r) {
                if (r == q) continue;
                const double xr = static_cast<double>(start + r) * h;
                num *= (x - xr);
                den *= (xq - xr);
            }
            w[q] = num / den;
        }
    }

    double eval_quasi(const Point& p) const {
        const int l = op_.degree;
        std::int64_t first[3] = {0, 0, 0};
        double w[3][16];
        for (int a = 0; a < grid_.dim; ++a)
            lagrange_weights(p[static_cast<std::size_t>(a)], first[a], w[a]);
        double s = 0.0;
        const int rb = grid_.dim >= 2 ? l + 1 : 1;
        const int rc = grid_.dim >= 3 ? l + 1 : 1;
        for (int qa = 0; qa <= l; ++qa)
            for (int qb = 0; qb < rb; ++qb)
                for (int qc = 0; qc < rc; ++qc)
                    s += w[0][qa] * (grid_.dim >= 2 ? w[1][qb] : 1.0) *
                         (grid_.dim >= 3 ? w[2][qc] : 1.0) *
                         values_(first[0] + qa, grid_.dim >= 2 ? first[1] + qb : 0,
                                 grid_.dim >= 3 ? first[2] + qc : 0);
        return s;
    }

    CorrectionOperator op_;
    GridSpec grid_;
    Tensor values_;
    std::shared_ptr<InterpSpline1D> spline_;
};

/// e = f - S* at the interior nodes, with S* read through the node labels;
/// the padding stays zero so e is itself a valid grid function.
inline GridFunction residual(const GridFunction& g, const PiecewiseApproximant& s) {
    if (!(g.spec() == s.labeling->grid))
        throw std::length_error("residual: approximant was fitted on a different grid");
    GridFunction e(g.spec());
    const Tensor sbar = s.grid_values();
    e.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        e(i, j, k) = g(i, j, k) - sbar(i, j, k);
    });
    return e;
}

enum class EvalMode { detected, exact };

/// f~ = S* + e~. In detected mode points are classified by the labeling; in
/// exact mode the caller's test function picks the branch and the
/// branch-to-label overlap map picks the matching coefficients.
struct CorrectedApproximant {
    std::shared_ptr<const PiecewiseApproximant> first_stage;
    CorrectionInterpolant correction;
    EvalMode mode = EvalMode::detected;
    const TestFunction* tf = nullptr;
    std::vector<int> branch_to_label;

    double eval(const Point& p) const {
        int region;
        if (mode == EvalMode::exact && tf) {
            region = branch_to_label[static_cast<std::size_t>(tf->branch_at(p) - 1)];
        } else {
            region = first_stage->labeling->classify(p);
        }
        return first_stage->eval_region(region, p) + correction.eval(p);
    }
};

/// Majority-overlap map from test-function branches to detected labels.
inline std::vector<int> branch_label_map(const TestFunction& tf, const RegionLabeling& labeling) {
    const int nb = tf.branch_count();
    std::vector<std::vector<std::int64_t>> overlap(
        static_cast<std::size_t>(nb), std::vector<std::int64_t>(static_cast<std::size_t>(labeling.R), 0));
    const double h = labeling.grid.h();
    const std::int64_t n = labeling.grid.N;
    const std::int64_t jmax = labeling.grid.dim >= 2 ? n : 0;
    const std::int64_t kmax = labeling.grid.dim >= 3 ? n : 0;
    for (std::int64_t i = 0; i <= n; ++i)
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k) {
                const Point p{i * h, labeling.grid.dim >= 2 ? j * h : 0.0,
                              labeling.grid.dim >= 3 ? k * h : 0.0};
                const int b = tf.branch_at(p);
                const int lab = labeling.label_at_node(i, j, k);
                if (lab < 1) continue;  // censored or sentinel nodes don't vote
                ++overlap[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(lab - 1)];
            }
    std::vector<int> map(static_cast<std::size_t>(nb), 1);
    for (int b = 0; b < nb; ++b) {
        int best = 1;
        std::int64_t cnt = -1;
        for (int r = 1; r <= labeling.R; ++r)
            if (overlap[static_cast<std::size_t>(b)][static_cast<std::size_t>(r - 1)] > cnt) {
                cnt = overlap[static_cast<std::size_t>(b)][static_cast<std::size_t>(r - 1)];
                best = r;
            }
        map[static_cast<std::size_t>(b)] = best;
    }
    return map;
}

/// Residual consistent with exact-mode evaluation: each node is compared
/// against the branch the test function itself selects there (mapped to the
/// fitted region), so label disagreements near the singular set do not leave
/// spikes in the data the correction interpolates.
inline GridFunction residual_exact(const GridFunction& g, const PiecewiseApproximant& s,
                                   const TestFunction& tf, const std::vector<int>& map) {
    GridFunction e(g.spec());
    e.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        const Point p = g.node(i, j, k);
        const int region = map[static_cast<std::size_t>(tf.branch_at(p) - 1)];
        e(i, j, k) = g(i, j, k) - s.eval_region(region, p);
    });
    return e;
}

inline CorrectedApproximant corrected(const GridFunction& g,
                                      std::shared_ptr<const PiecewiseApproximant> s,
                                      const CorrectionOperator& op,
                                      EvalMode mode = EvalMode::detected,
                                      const TestFunction* tf = nullptr) {
    CorrectedApproximant out;
    out.first_stage = s;
    out.mode = mode;
    out.tf = tf;
    if (tf) out.branch_to_label = branch_label_map(*tf, *s->labeling);
    const GridFunction e = (mode == EvalMode::exact && tf)
                               ? residual_exact(g, *s, *tf, out.branch_to_label)
                               : residual(g, *s);
    out.correction = CorrectionInterpolant::build(e, op);
    return out;
}

/// Error samples on a refinement of the grid, split into the three zones the
/// error discussion uses: near the domain boundary, near the detected
/// singular set, and elsewhere.
struct ErrorField {
    GridSpec base;
    int fine_factor = 1;
    std::int64_t nodes_per_axis = 0;
    std::vector<double> errors;         ///< fine lattice, x slowest
    std::vector<unsigned char> zones;   ///< 0 boundary, 1 singular, 2 elsewhere
    double max_abs = 0.0;
    Point argmax{0.0, 0.0, 0.0};
    std::array<double, 3> zone_max{0.0, 0.0, 0.0};

    static const char* zone_name(unsigned char z) {
        return z == 0 ? "boundary" : (z == 1 ? "singular" : "elsewhere");
    }
};

namespace detail {
inline unsigned char zone_of(const Point& p, int dim, double x_max, double width,
                             const std::vector<Point>& singular_ref) {
    double bd = std::numeric_limits<double>::max();
    for (int a = 0; a < dim; ++a)
        bd = std::min({bd, p[static_cast<std::size_t>(a)],
                       x_max - p[static_cast<std::size_t>(a)]});
    if (bd <= width) return 0;
    double sd2 = std::numeric_limits<double>::max();
    for (const auto& q : singular_ref) {
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double dd = p[static_cast<std::size_t>(a)] - q[static_cast<std::size_t>(a)];
            d2 += dd * dd;
        }
        sd2 = std::min(sd2, d2);
    }
    if (sd2 <= width * width) return 1;
    return 2;
}
}  // namespace detail

/// Evaluate f - f~ on the fine lattice (spacing h / fine_factor) and
/// summarize per zone. The summary is computed from the stored field in one
/// pass, so the two cannot disagree.
inline ErrorField error_report(const TestFunction& tf, const CorrectedApproximant& fa,
                               int fine_factor, double zone_width,
                               const std::vector<Point>& singular_ref) {
    if (fine_factor < 1) throw std::invalid_argument("error_report: fine factor must be >= 1");
    const GridSpec& gs = fa.first_stage->labeling->grid;
    ErrorField field;
    field.base = gs;
    field.fine_factor = fine_factor;
    field.nodes_per_axis = static_cast<std::int64_t>(gs.N) * fine_factor + 1;
    const std::int64_t nn = field.nodes_per_axis;
    const double step = gs.h() / fine_factor;
    const double x_max = gs.x_max();
    const int dim = gs.dim;
    const std::int64_t jmax = dim >= 2 ? nn - 1 : 0;
    const std::int64_t kmax = dim >= 3 ? nn - 1 : 0;
    std::int64_t total = nn;
    for (int a = 1; a < dim; ++a) total *= nn;
    field.errors.assign(static_cast<std::size_t>(total), 0.0);
    field.zones.assign(static_cast<std::size_t>(total), 2);

    parallel_for(nn, [&](std::int64_t i) {
        std::int64_t at = i * (dim >= 2 ? nn : 1) * (dim >= 3 ? nn : 1);
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k, ++at) {
                const Point p{i * step, dim >= 2 ? j * step : 0.0, dim >= 3 ? k * step : 0.0};
                field.errors[static_cast<std::size_t>(at)] = tf(p) - fa.eval(p);
                field.zones[static_cast<std::size_t>(at)] =
                    detail::zone_of(p, dim, x_max, zone_width, singular_ref);
            }
    });

    std::int64_t at = 0;
    for (std::int64_t i = 0; i < nn; ++i)
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k, ++at) {
                const double e = std::abs(field.errors[static_cast<std::size_t>(at)]);
                const unsigned char z = field.zones[static_cast<std::size_t>(at)];
                field.zone_max[z] = std::max(field.zone_max[z], e);
                if (e > field.max_abs) {
                    field.max_abs = e;
                    field.argmax = {i * step, dim >= 2 ? j * step : 0.0,
                                    dim >= 3 ? k * step : 0.0};
                }
            }
    return field;
}

/// Zone-tagged field straight from grid-resident values (used for the
/// first-stage error artifact).
inline ErrorField field_from_grid(const GridFunction& e, double zone_width,
                                  const std::vector<Point>& singular_ref) {
    const GridSpec& gs = e.spec();
    ErrorField field;
    field.base = gs;
    field.fine_factor = 1;
    field.nodes_per_axis = gs.N + 1;
    const double x_max = gs.x_max();
    const int dim = gs.dim;
    std::int64_t total = field.nodes_per_axis;
    for (int a = 1; a < dim; ++a) total *= field.nodes_per_axis;
    field.errors.reserve(static_cast<std::size_t>(total));
    field.zones.reserve(static_cast<std::size_t>(total));
    e.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        const Point p = e.node(i, j, k);
        const double v = e(i, j, k);
        const unsigned char z = detail::zone_of(p, dim, x_max, zone_width, singular_ref);
        field.errors.push_back(v);
        field.zones.push_back(z);
        field.zone_max[z] = std::max(field.zone_max[z], std::abs(v));
        if (std::abs(v) > field.max_abs) {
            field.max_abs = std::abs(v);
            field.argmax = p;
        }
    });
    return field;
}

}  // namespace sigfit
