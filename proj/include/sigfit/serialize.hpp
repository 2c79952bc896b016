#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sigfit/csv.hpp"
#include "sigfit/detect.hpp"
#include "sigfit/fit.hpp"

namespace sigfit {

/// Versioned text serialization of a first-stage approximant: basis
/// descriptor, labeling (node labels run-length encoded, plus the 1-D
/// breakpoints or the level-set spline), and per-region coefficients.
/// Doubles are stored as hexfloats so round-trips are bit-exact.
inline void save_approximant(const std::string& path, const PiecewiseApproximant& s) {
    auto f = csvio::open_out(path);
    const RegionLabeling& lab = *s.labeling;
    f << "sigfit-approximant v1\n";
    f << "grid " << lab.grid.dim << " " << lab.grid.N << " " << lab.grid.pad << "\n";
    if (s.basis.kind() == BasisKind::bspline_tensor)
        f << "basis bspline " << s.basis.spline_order() << " "
          << csvio::fmt_hex(s.basis.knot_spacing()) << "\n";
    else
        f << "basis chebyshev " << s.basis.degree() << "\n";
    f << "regions " << lab.R << "\n";

    f << "labels-rle";
    const auto& data = lab.labels->data();
    for (std::size_t at = 0; at < data.size();) {
        std::size_t run = at;
        while (run < data.size() && data[run] == data[at]) ++run;
        f << " " << data[at] << ":" << (run - at);
        at = run;
    }
    f << "\n";

    if (lab.grid.dim == 1) {
        f << "breakpoints " << lab.breakpoints.size();
        for (double b : lab.breakpoints) f << " " << csvio::fmt_hex(b);
        f << "\n";
        f << "segment-labels " << lab.segment_labels.size();
        for (int v : lab.segment_labels) f << " " << v;
        f << "\n";
    } else if (lab.levelset) {
        f << "levelset " << csvio::fmt_hex(lab.levelset->knot_spacing) << " "
          << lab.levelset->per_axis;
        for (Eigen::Index i = 0; i < lab.levelset->coef.size(); ++i)
            f << " " << csvio::fmt_hex(lab.levelset->coef[i]);
        f << "\n";
    }

    for (int r = 1; r <= lab.R; ++r) {
        const auto& a = s.coeffs[static_cast<std::size_t>(r - 1)];
        f << "coeffs " << r << " " << a.size();
        for (Eigen::Index i = 0; i < a.size(); ++i) f << " " << csvio::fmt_hex(a[i]);
        f << "\n";
    }
    f << "residual " << csvio::fmt_hex(s.residual_sq) << "\n";
    f << "rank " << s.rank << "\n";
    f << "end\n";
}

inline PiecewiseApproximant load_approximant(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "sigfit-approximant v1")
        throw std::runtime_error("approximant file: bad or missing version line");

    PiecewiseApproximant s;
    auto labeling = std::make_shared<RegionLabeling>();
    std::shared_ptr<LabelTensor> labels;
    while (std::getline(f, line)) {
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "end") break;
        if (key == "grid") {
            int dim, n, pad;
            is >> dim >> n >> pad;
            labeling->grid = GridSpec(dim, n, pad);
            const std::int64_t nn = n + 1;
            labels = std::make_shared<LabelTensor>(dim, std::array<std::int64_t, 3>{nn, nn, nn});
        } else if (key == "basis") {
            std::string kind;
            is >> kind;
            if (kind == "bspline") {
                int m;
                std::string dh;
                is >> m >> dh;
                s.basis = TensorBasis::bspline(labeling->grid.dim, m, csvio::parse_hex(dh));
            } else {
                int deg;
                is >> deg;
                s.basis = TensorBasis::chebyshev(labeling->grid.dim, deg);
            }
        } else if (key == "regions") {
            is >> labeling->R;
        } else if (key == "labels-rle") {
            std::string tok;
            std::size_t at = 0;
            while (is >> tok) {
                const auto colon = tok.find(':');
                const int lab = std::stoi(tok.substr(0, colon));
                const std::size_t run = std::stoull(tok.substr(colon + 1));
                for (std::size_t q = 0; q < run; ++q) labels->data()[at++] = lab;
            }
            if (at != labels->data().size())
                throw std::runtime_error("approximant file: label run length mismatch");
        } else if (key == "breakpoints") {
            std::size_t cnt;
            is >> cnt;
            std::string tok;
            for (std::size_t q = 0; q < cnt; ++q) {
                is >> tok;
                labeling->breakpoints.push_back(csvio::parse_hex(tok));
            }
        } else if (key == "segment-labels") {
            std::size_t cnt;
            is >> cnt;
            for (std::size_t q = 0; q < cnt; ++q) {
                int v;
                is >> v;
                labeling->segment_labels.push_back(v);
            }
        } else if (key == "levelset") {
            auto D = std::make_shared<LevelSetSpline>();
            D->dim = labeling->grid.dim;
            std::string dh;
            is >> dh >> D->per_axis;
            D->knot_spacing = csvio::parse_hex(dh);
            std::int64_t cols = D->per_axis;
            for (int a = 1; a < D->dim; ++a) cols *= D->per_axis;
            D->coef.resize(cols);
            std::string tok;
            for (std::int64_t q = 0; q < cols; ++q) {
                is >> tok;
                D->coef[q] = csvio::parse_hex(tok);
            }
            labeling->levelset = std::move(D);
        } else if (key == "coeffs") {
            int r;
            Eigen::Index cnt;
            is >> r >> cnt;
            Eigen::VectorXd a(cnt);
            std::string tok;
            for (Eigen::Index q = 0; q < cnt; ++q) {
                is >> tok;
                a[q] = csvio::parse_hex(tok);
            }
            s.coeffs.push_back(std::move(a));
        } else if (key == "residual") {
            std::string tok;
            is >> tok;
            s.residual_sq = csvio::parse_hex(tok);
        } else if (key == "rank") {
            is >> s.rank;
        }
    }
    labeling->labels = std::move(labels);
    s.labeling = std::move(labeling);
    if (static_cast<int>(s.coeffs.size()) != s.labeling->R)
        throw std::runtime_error("approximant file: coefficient blocks do not match regions");
    return s;
}

}  // namespace sigfit
