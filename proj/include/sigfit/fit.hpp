#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sigfit/basis.hpp"
#include "sigfit/detect.hpp"
#include "sigfit/grid.hpp"
#include "sigfit/linalg.hpp"
#include "sigfit/parallel.hpp"
#include "sigfit/signature.hpp"

namespace sigfit {

/// Signatures of every region-restricted basis element, flattened the same
/// way as the data signature: column (r, i, j[,l]) lives at flat index
/// (r-1)*per_region + element, elements ordered with the x factor slowest.
struct SignatureColumns {
    SignatureSpec sigspec;
    GridSpec grid;
    int regions = 0;
    std::int64_t per_region = 0;
    Eigen::MatrixXd C;  ///< signature length x (regions * per_region)
    std::vector<std::int64_t> zero_columns;

    std::int64_t cols() const { return C.cols(); }
    std::int64_t rows() const { return C.rows(); }
    std::int64_t column_index(int region, std::int64_t element) const {
        return (region - 1) * per_region + element;
    }
};

/// Build one signature column per restricted basis element. Workhorse of
/// the first stage; columns are materialized grid functions pushed through
/// the same signature operator as the data.
inline SignatureColumns build_columns(const TensorBasis& basis, const RegionLabeling& labeling,
                                      const SignatureSpec& sigspec) {
    if (sigspec.expected_dim() != labeling.grid.dim)
        throw std::invalid_argument("build_columns: signature kind does not match grid dimension");
    SignatureColumns out;
    out.sigspec = sigspec;
    out.grid = labeling.grid;
    out.regions = labeling.R;
    out.per_region = basis.size();

    std::vector<RestrictedBasis> restricted;
    restricted.reserve(static_cast<std::size_t>(labeling.R));
    for (int r = 1; r <= labeling.R; ++r)
        restricted.push_back(restrict_basis(basis, labeling.grid, labeling.labels, r));

    // Probe one column for the flattened signature length.
    {
        GridFunction scratch(labeling.grid);
        restricted[0].materialize_column(0, scratch);
        const Signature probe = compute_signature(scratch, sigspec);
        out.C.resize(probe.total_size(), labeling.R * out.per_region);
    }

    const std::int64_t total = out.C.cols();
    std::vector<unsigned char> zero_flag(static_cast<std::size_t>(total), 0);
    parallel_for(total, [&](std::int64_t col) {
        thread_local std::unique_ptr<GridFunction> scratch;
        if (!scratch || !(scratch->spec() == labeling.grid))
            scratch = std::make_unique<GridFunction>(labeling.grid);
        const int r = static_cast<int>(col / out.per_region) + 1;
        const std::int64_t elem = col % out.per_region;
        restricted[static_cast<std::size_t>(r - 1)].materialize_column(elem, *scratch);
        const Signature sig = compute_signature(*scratch, sigspec);
        sig.flatten_into(out.C.col(col).data());
        if (out.C.col(col).isZero(0.0)) zero_flag[static_cast<std::size_t>(col)] = 1;
    });
    for (std::int64_t c = 0; c < total; ++c)
        if (zero_flag[static_cast<std::size_t>(c)]) out.zero_columns.push_back(c);
    return out;
}

/// Normal equations of the signature match: A = <sigma_i, sigma_j>,
/// b_i = <sigma_i, sigma(f)>, assembled blockwise with compensated merging.
inline NormalSystem assemble(const SignatureColumns& cols, const Signature& data_sig,
                             double trunc_tol = 1e-12) {
    const Eigen::VectorXd sig_f = data_sig.flatten();
    if (sig_f.size() != cols.rows())
        throw std::length_error("assemble: column and data signature lengths differ");
    GramAccumulator acc(cols.cols());
    acc.add_rows(cols.C, sig_f);
    return acc.finish(trunc_tol);
}

/// First-stage approximant: per-region coefficient vectors over the basis,
/// evaluated through the labeling that produced the columns.
struct PiecewiseApproximant {
    TensorBasis basis;
    std::shared_ptr<const RegionLabeling> labeling;
    std::vector<Eigen::VectorXd> coeffs;  ///< one vector per region 1..R
    double residual_sq = 0.0;             ///< achieved ||sigma(f) - sigma(S)||_2^2
    int rank = -1;
    std::int64_t zero_column_count = 0;
    std::vector<double> refine_norms;

    double eval_region(int region, const Point& p) const {
        thread_local std::vector<std::pair<std::int64_t, double>> sparse;
        basis.eval_sparse(p, sparse);
        const Eigen::VectorXd& a = coeffs[static_cast<std::size_t>(region - 1)];
        double s = 0.0;
        for (const auto& [idx, v] : sparse) s += a[idx] * v;
        return s;
    }

    double eval(const Point& p) const { return eval_region(labeling->classify(p), p); }

    /// Values at the interior grid nodes using the node labels (the grid
    /// tensor the signature match actually controlled).
    Tensor grid_values() const {
        const GridSpec& gs = labeling->grid;
        const std::int64_t nn = gs.N + 1;
        Tensor out(gs.dim, {nn, nn, nn});
        const double h = gs.h();
        const std::int64_t jmax = gs.dim >= 2 ? gs.N : 0;
        const std::int64_t kmax = gs.dim >= 3 ? gs.N : 0;
        parallel_for(nn, [&](std::int64_t i) {
            for (std::int64_t j = 0; j <= jmax; ++j)
                for (std::int64_t k = 0; k <= kmax; ++k) {
                    const Point p{i * h, gs.dim >= 2 ? j * h : 0.0, gs.dim >= 3 ? k * h : 0.0};
                    int region = labeling->label_at_node(i, j, k);
                    if (region == 0) region = labeling->classify(p);  // censored node
                    out(i, j, k) = eval_region(region, p);
                }
        });
        return out;
    }
};

/// Weak pointwise constraints appended to the signature system: weight *
/// (S_region(p) - value). Used to stabilize directions the signature rows
/// leave free after nodes have been censored out.
struct ValueAnchors {
    std::vector<Point> points;
    std::vector<int> regions;
    std::vector<double> values;
    double weight = 0.0;

    std::size_t size() const { return points.size(); }
};

/// End-to-end first stage: restricted signature columns, normal equations,
/// truncated-pseudoinverse solve with refinement, coefficients split per
/// region. The residual is recovered algebraically from the normal system.
inline PiecewiseApproximant first_stage(const GridFunction& g,
                                        std::shared_ptr<const RegionLabeling> labeling,
                                        const TensorBasis& basis, const SignatureSpec& sigspec,
                                        double trunc_tol = 1e-12, int refine_iters = 3,
                                        const ValueAnchors* anchors = nullptr) {
    if (!labeling || labeling->R < 1)
        throw std::invalid_argument("first_stage: labeling must cover at least one region");
    SignatureColumns cols = build_columns(basis, *labeling, sigspec);
    const Signature data_sig = compute_signature(g, sigspec);
    NormalSystem sys;
    if (anchors && anchors->size() > 0 && anchors->weight > 0.0) {
        const Eigen::VectorXd sig_f = data_sig.flatten();
        if (sig_f.size() != cols.rows())
            throw std::length_error("assemble: column and data signature lengths differ");
        GramAccumulator acc(cols.cols());
        acc.add_rows(cols.C, sig_f);
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(anchors->size()),
                                                  cols.cols());
        Eigen::VectorXd v(static_cast<Eigen::Index>(anchors->size()));
        std::vector<std::pair<std::int64_t, double>> sparse;
        for (std::size_t q = 0; q < anchors->size(); ++q) {
            basis.eval_sparse(anchors->points[q], sparse);
            const std::int64_t base = (anchors->regions[q] - 1) * cols.per_region;
            for (const auto& [idx, val] : sparse)
                V(static_cast<Eigen::Index>(q), base + idx) = anchors->weight * val;
            v[static_cast<Eigen::Index>(q)] = anchors->weight * anchors->values[q];
        }
        acc.add_rows(V, v);
        sys = acc.finish(trunc_tol);
    } else {
        sys = assemble(cols, data_sig, trunc_tol);
    }
    SolveReport rep = solve_normal_system(sys, refine_iters);

    PiecewiseApproximant s;
    s.basis = basis;
    s.labeling = std::move(labeling);
    s.rank = rep.rank;
    s.refine_norms = rep.residual_norms;
    s.zero_column_count = static_cast<std::int64_t>(cols.zero_columns.size());
    // directly, not via a'Aa - 2a'b + |f|^2, which cancels catastrophically
    s.residual_sq = (cols.C * rep.a - data_sig.flatten()).squaredNorm();
    for (int r = 1; r <= s.labeling->R; ++r)
        s.coeffs.push_back(rep.a.segment((r - 1) * cols.per_region, cols.per_region));
    return s;
}

}  // namespace sigfit
