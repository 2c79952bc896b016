#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sigfit {

/// Elementwise Kahan-compensated accumulator for Eigen matrices/vectors.
/// Used to merge per-block Gram contributions without drift.
template <typename Mat>
class KahanSum {
public:
    KahanSum(Eigen::Index rows, Eigen::Index cols)
        : sum_(Mat::Zero(rows, cols)), comp_(Mat::Zero(rows, cols)) {}

    void add(const Mat& x) {
        Mat y = x - comp_;
        Mat t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }

    const Mat& value() const { return sum_; }

private:
    Mat sum_, comp_;
};

/// Gram matrix and right-hand side of the signature-matching normal
/// equations, plus the data norm so the achieved residual can be recovered
/// as ||sigma(f)||^2 - 2 a'b + a'Aa without materializing sigma(S).
struct NormalSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double data_norm_sq = 0.0;
    double trunc_tol = 1e-12;  ///< relative singular-value cutoff
    int rank = -1;             ///< filled in after factorization
};

struct SolveReport {
    Eigen::VectorXd a;
    int rank = 0;
    int refine_steps = 0;
    std::vector<double> residual_norms;  ///< ||b - A a|| after each iterate
    bool stalled = false;                ///< refinement stopped improving early
};

/// Truncated pseudoinverse of a symmetric PSD matrix via eigendecomposition
/// (for symmetric A this is the SVD up to sign). Modes below
/// rel_tol * lambda_max are dropped, giving the minimum-norm solution.
class PinvSolver {
public:
    PinvSolver(const Eigen::MatrixXd& A, double rel_tol) {
        es_.compute(A);
        if (es_.info() != Eigen::Success)
            throw std::runtime_error("PinvSolver: eigendecomposition failed");
        const Eigen::VectorXd& ev = es_.eigenvalues();
        const double lmax = ev.size() ? std::max(0.0, ev[ev.size() - 1]) : 0.0;
        if (ev.size() && ev[0] < -1e-8 * std::max(lmax, 1.0))
            throw std::runtime_error("PinvSolver: matrix is not positive semidefinite");
        thresh_ = rel_tol * lmax;
        rank_ = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev[i] > thresh_) ++rank_;
    }

    int rank() const { return rank_; }

    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& r) const {
        Eigen::VectorXd w = es_.eigenvectors().transpose() * r;
        const Eigen::VectorXd& ev = es_.eigenvalues();
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w[i] = (ev[i] > thresh_) ? w[i] / ev[i] : 0.0;
        return es_.eigenvectors() * w;
    }

private:
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_;
    double thresh_ = 0.0;
    int rank_ = 0;
};

/// Residual b - A*a with long-double row accumulation, so the refinement
/// iterates see a residual computed beyond working precision.
inline Eigen::VectorXd compensated_residual(const Eigen::MatrixXd& A,
                                            const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& b) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        long double acc = static_cast<long double>(b[i]);
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            acc -= static_cast<long double>(A(i, j)) * static_cast<long double>(a[j]);
        r[i] = static_cast<double>(acc);
    }
    return r;
}

/// Minimum-norm least-squares solve of the normal system by truncated
/// pseudoinverse plus iterative residual refinement. Refinement stops when
/// the residual norm no longer decreases; the best iterate is kept.
inline SolveReport solve_normal_system(NormalSystem& sys, int refine_iters = 3) {
    PinvSolver pinv(sys.A, sys.trunc_tol);
    sys.rank = pinv.rank();

    SolveReport rep;
    rep.rank = pinv.rank();
    rep.a = pinv.apply(sys.b);
    Eigen::VectorXd r = compensated_residual(sys.A, rep.a, sys.b);
    double best_norm = r.norm();
    rep.residual_norms.push_back(best_norm);
    Eigen::VectorXd best = rep.a;
    for (int it = 0; it < refine_iters; ++it) {
        Eigen::VectorXd candidate = rep.a + pinv.apply(r);
        Eigen::VectorXd rc = compensated_residual(sys.A, candidate, sys.b);
        const double norm = rc.norm();
        rep.residual_norms.push_back(norm);
        ++rep.refine_steps;
        if (norm >= best_norm) {
            rep.stalled = true;
            break;
        }
        best_norm = norm;
        best = candidate;
        rep.a = candidate;
        r = rc;
    }
    rep.a = best;
    return rep;
}

/// A += C'C and b += C'y over row blocks, with Kahan compensation across
/// blocks. Fills only the lower triangle of the accumulator; callers mirror
/// at the end.
class GramAccumulator {
public:
    explicit GramAccumulator(Eigen::Index cols, Eigen::Index block_rows = 8192)
        : cols_(cols), block_rows_(block_rows), a_(cols, cols), b_(cols, 1), norm_(1, 1) {}

    void add_rows(const Eigen::Ref<const Eigen::MatrixXd>& c_rows,
                  const Eigen::Ref<const Eigen::VectorXd>& y_rows) {
        for (Eigen::Index at = 0; at < c_rows.rows(); at += block_rows_) {
            const Eigen::Index len = std::min(block_rows_, c_rows.rows() - at);
            const auto cb = c_rows.middleRows(at, len);
            const auto yb = y_rows.segment(at, len);
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(cols_, cols_);
            t.selfadjointView<Eigen::Lower>().rankUpdate(cb.transpose());
            a_.add(t);
            b_.add(cb.transpose() * yb);
            Eigen::MatrixXd n(1, 1);
            n(0, 0) = yb.squaredNorm();
            norm_.add(n);
        }
    }

    NormalSystem finish(double trunc_tol) const {
        NormalSystem sys;
        sys.A = a_.value();
        sys.A.triangularView<Eigen::StrictlyUpper>() =
            sys.A.triangularView<Eigen::StrictlyLower>().transpose();
        sys.b = b_.value();
        sys.data_norm_sq = norm_.value()(0, 0);
        sys.trunc_tol = trunc_tol;
        return sys;
    }

private:
    Eigen::Index cols_;
    Eigen::Index block_rows_;
    KahanSum<Eigen::MatrixXd> a_;
    KahanSum<Eigen::MatrixXd> b_;
    KahanSum<Eigen::MatrixXd> norm_;
};

}  // namespace sigfit
