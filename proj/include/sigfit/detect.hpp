#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sigfit/bspline.hpp"
#include "sigfit/grid.hpp"
#include "sigfit/linalg.hpp"
#include "sigfit/tensor.hpp"

namespace sigfit {

/// Critical spacing below which a jump interval is detectable:
/// h_c = |[f]| / (4 sup|f'|).
inline double critical_spacing(double jump, double sup_deriv) {
    if (sup_deriv <= 0.0) throw std::domain_error("critical_spacing: sup|f'| must be positive");
    return std::abs(jump) / (4.0 * sup_deriv);
}

/// One detected jump interval on an axis-parallel grid line.
struct CrossingHit {
    int axis = 0;                      ///< direction the line runs along
    std::array<std::int64_t, 2> line;  ///< fixed indices of the other axes, ascending axis order
    std::int64_t interval = 0;         ///< jump inside (interval*h, (interval+1)*h)
    double midpoint = 0.0;             ///< (interval + 1/2) * h
    bool bridged = false;              ///< filled in by the gap-bridging pass
};

/// The Q0 point set: interval midpoints over all axis-parallel lines, with
/// per-line provenance kept so the labeling stage can cut exactly the edges
/// that straddle a midpoint.
struct CrossingCloud {
    GridSpec grid;
    std::vector<CrossingHit> hits;

    Point position(const CrossingHit& h) const {
        const double hh = grid.h();
        Point p{0.0, 0.0, 0.0};
        int other = 0;
        for (int a = 0; a < grid.dim; ++a) {
            if (a == h.axis) p[static_cast<std::size_t>(a)] = h.midpoint;
            else p[static_cast<std::size_t>(a)] = h.line[static_cast<std::size_t>(other++)] * hh;
        }
        return p;
    }

    std::vector<Point> points() const {
        std::vector<Point> out;
        out.reserve(hits.size());
        for (const auto& h : hits) out.push_back(position(h));
        return out;
    }
};

struct DetectionParams {
    double tau = -1.0;          ///< absolute threshold; <= 0 means 5x median |d1| per line
    int max_hits_per_line = 1;
    bool bridge_gaps = true;
    int bridge_max_gap = 16;    ///< how far to look for flanking detected lines
    int max_regions = 8;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1), v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

/// Multi-hit rule: local maxima of |d1| above both the threshold and a
/// quarter of the line max, kept in magnitude order with adjacent duplicates
/// rejected. Single-hit adds the dominance guard over the next-largest
/// non-adjacent difference.
inline std::vector<std::int64_t> detect_line(const std::vector<double>& values, double tau,
                                             int max_hits) {
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    if (n < 4) throw std::invalid_argument("detect_line: need at least 4 samples");
    std::vector<double> diff(static_cast<std::size_t>(n - 1));
    std::vector<double> absd(static_cast<std::size_t>(n - 1));
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        diff[static_cast<std::size_t>(i)] =
            values[static_cast<std::size_t>(i + 1)] - values[static_cast<std::size_t>(i)];
        absd[static_cast<std::size_t>(i)] = std::abs(diff[static_cast<std::size_t>(i)]);
    }
    const double tau_eff = tau > 0.0 ? tau : 5.0 * median(absd);
    const std::int64_t nd = static_cast<std::int64_t>(absd.size());
    std::int64_t imax = 0;
    for (std::int64_t i = 1; i < nd; ++i)
        if (absd[static_cast<std::size_t>(i)] > absd[static_cast<std::size_t>(imax)]) imax = i;
    const double vmax = absd[static_cast<std::size_t>(imax)];
    if (!(vmax > tau_eff)) return {};

    if (max_hits <= 1) {
        double next = 0.0;
        for (std::int64_t i = 0; i < nd; ++i)
            if (std::abs(i - imax) > 1) next = std::max(next, absd[static_cast<std::size_t>(i)]);
        if (!(vmax > 2.0 * next)) return {};
        return {imax};
    }

    // Adjacent differences of opposite sign are two genuine crossings (a
    // surface grazed one node deep), so the local-max test and the
    // separation guard only act among same-signed neighbors.
    const auto same_sign = [&](std::int64_t a, std::int64_t b) {
        return (diff[static_cast<std::size_t>(a)] >= 0.0) ==
               (diff[static_cast<std::size_t>(b)] >= 0.0);
    };
    // a genuine one-node graze shows two comparable opposite-signed
    // differences; a lone strong crossing flanked by an opposite wiggle
    // does not, and the wiggle must not pass as a second crossing
    const auto distinct_neighbor = [&](std::int64_t i, std::int64_t other) {
        return !same_sign(i, other) && absd[static_cast<std::size_t>(i)] * 3.0 >=
                                           absd[static_cast<std::size_t>(other)];
    };
    std::vector<std::int64_t> cand;
    for (std::int64_t i = 0; i < nd; ++i) {
        const double v = absd[static_cast<std::size_t>(i)];
        if (!(v > tau_eff)) continue;
        const bool lo_ok = i == 0 || v >= absd[static_cast<std::size_t>(i - 1)] ||
                           distinct_neighbor(i, i - 1);
        const bool hi_ok = i + 1 >= nd || v >= absd[static_cast<std::size_t>(i + 1)] ||
                           distinct_neighbor(i, i + 1);
        if (lo_ok && hi_ok) cand.push_back(i);
    }
    std::sort(cand.begin(), cand.end(), [&](std::int64_t a, std::int64_t b) {
        return absd[static_cast<std::size_t>(a)] > absd[static_cast<std::size_t>(b)];
    });
    std::vector<std::int64_t> hits;
    for (std::int64_t c : cand) {
        bool near = false;
        for (std::int64_t acc : hits)
            if (std::abs(acc - c) <= 1 && !distinct_neighbor(c, acc)) near = true;
        if (near) continue;
        hits.push_back(c);
        if (static_cast<int>(hits.size()) >= max_hits) break;
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

}  // namespace detail

/// Single-interval detection on one line of interior samples; absence is a
/// valid result. The midpoint is (j + 1/2) h.
inline std::optional<std::pair<std::int64_t, double>> detect_interval_1d(
    const std::vector<double>& values, double h, double tau = -1.0) {
    auto hits = detail::detect_line(values, tau, 1);
    if (hits.empty()) return std::nullopt;
    return std::make_pair(hits[0], (static_cast<double>(hits[0]) + 0.5) * h);
}

namespace detail {

/// Shared scan state for one axis family: hit interval lists indexed by the
/// flattened line index over the remaining axes.
struct LineFamily {
    int axis;
    std::int64_t lines0, lines1;  // extents of the line-index space (lines1==1 in 2-D)
    std::vector<std::vector<std::int64_t>> hits;
    std::vector<std::vector<double>> diffs;  ///< signed first difference at each hit
    std::vector<std::vector<unsigned char>> bridged;
    std::vector<double> tau_eff;             ///< per-line threshold actually applied

    std::int64_t flat(std::int64_t a, std::int64_t b) const { return a * lines1 + b; }
};

inline std::vector<double> extract_line(const GridFunction& g, int axis, std::int64_t l0,
                                        std::int64_t l1) {
    const int n = g.N();
    std::vector<double> v(static_cast<std::size_t>(n + 1));
    for (std::int64_t t = 0; t <= n; ++t) {
        std::int64_t i = 0, j = 0, k = 0;
        if (axis == 0) { i = t; j = l0; k = l1; }
        else if (axis == 1) { i = l0; j = t; k = l1; }
        else { i = l0; j = l1; k = t; }
        v[static_cast<std::size_t>(t)] = g(i, j, k);
    }
    return v;
}

/// Kink locator used to sharpen a bridged position: the second differences
/// sit at O(h) across a crossing whose function jump vanishes but whose
/// gradient jump does not, while smooth data stays at O(h^2). Returns the
/// refined interval, or `phat` when the window shows no clear signal.
inline std::int64_t refine_by_kink(const std::vector<double>& values, std::int64_t phat,
                                   int window) {
    const std::int64_t n = static_cast<std::int64_t>(values.size());
    std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t t = 1; t + 1 < n; ++t)
        d2[static_cast<std::size_t>(t)] =
            std::abs(values[static_cast<std::size_t>(t + 1)] -
                     2.0 * values[static_cast<std::size_t>(t)] +
                     values[static_cast<std::size_t>(t - 1)]);
    const double med = median(d2);
    std::int64_t best = -1;
    double best_v = 0.0;
    for (std::int64_t t = std::max<std::int64_t>(1, phat - window);
         t <= std::min(n - 2, phat + 1 + window); ++t) {
        if (d2[static_cast<std::size_t>(t)] > best_v) {
            best_v = d2[static_cast<std::size_t>(t)];
            best = t;
        }
    }
    if (best < 0 || best_v < 5.0 * med) return phat;
    // the kink node borders two intervals; take the side with the larger
    // first difference
    const double left = best > 0 ? std::abs(values[static_cast<std::size_t>(best)] -
                                            values[static_cast<std::size_t>(best - 1)])
                                 : -1.0;
    const double right = best + 1 < n ? std::abs(values[static_cast<std::size_t>(best + 1)] -
                                                 values[static_cast<std::size_t>(best)])
                                      : -1.0;
    return right >= left ? best : best - 1;
}

/// Geometric gap bridging: a line without a hit near an interpolated
/// position, flanked on opposite sides by detected lines whose hit
/// positions are compatible, receives a hit at the interpolated interval
/// (sharpened by the kink locator when the data cooperates). Repeats until
/// stable so gaps fill inward from both rims.
template <typename LineValues>
inline void bridge_family(LineFamily& fam, const DetectionParams& params,
                          LineValues&& line_values) {
    const std::int64_t G = params.bridge_max_gap;
    const std::int64_t dirs = fam.lines1 > 1 ? 2 : 1;
    struct Flank {
        std::int64_t t, q;
        double d;
    };
    // only directly detected hits may act as flanks: letting filled hits
    // flank later fills cascades phantom crossings across the interior
    const std::vector<std::vector<std::int64_t>> direct = fam.hits;
    const std::vector<std::vector<double>> direct_diffs = fam.diffs;
    for (std::int64_t a = 0; a < fam.lines0; ++a) {
        for (std::int64_t b = 0; b < fam.lines1; ++b) {
            const std::int64_t self = fam.flat(a, b);
            for (std::int64_t dir = 0; dir < dirs; ++dir) {
                const std::int64_t da = dir == 0 ? 1 : 0;
                const std::int64_t db = dir == 0 ? 0 : 1;
                // every direct hit on every flank line within range, both
                // sides; a line partway through a gap may carry one crossing
                // of a pair while the matching one sits several lines away
                std::vector<Flank> minus, plus;
                for (std::int64_t t = 1; t <= G; ++t) {
                    const std::int64_t aa = a - t * da, bb = b - t * db;
                    if (aa < 0 || bb < 0) break;
                    const std::size_t at = static_cast<std::size_t>(fam.flat(aa, bb));
                    for (std::size_t qi = 0; qi < direct[at].size(); ++qi)
                        minus.push_back({t, direct[at][qi], direct_diffs[at][qi]});
                }
                for (std::int64_t t = 1; t <= G; ++t) {
                    const std::int64_t aa = a + t * da, bb = b + t * db;
                    if (aa >= fam.lines0 || bb >= fam.lines1) break;
                    const std::size_t at = static_cast<std::size_t>(fam.flat(aa, bb));
                    for (std::size_t qi = 0; qi < direct[at].size(); ++qi)
                        plus.push_back({t, direct[at][qi], direct_diffs[at][qi]});
                }
                if (minus.empty() || plus.empty()) continue;
                const double tau_here = fam.tau_eff[static_cast<std::size_t>(self)];
                std::vector<std::pair<std::int64_t, std::pair<Flank, Flank>>> pairs;
                for (const Flank& fm : minus)
                    for (const Flank& fp : plus) {
                        // linear interpolation is only trustworthy over short
                        // spans of a gently sloped track; wide detection gaps
                        // are left to the level-set fallback, whose zones are
                        // weak-jump regions anyway
                        const std::int64_t span_t = fm.t + fp.t;
                        if (span_t > 8) continue;
                        if (std::abs(fm.q - fp.q) > 2 * span_t + 2) continue;
                        // opposite-signed flanks are an entry/exit chord
                        // unless the track is dipping through a vanishing
                        // jump, which shows as near-threshold magnitudes
                        const bool same = (fm.d >= 0.0) == (fp.d >= 0.0);
                        if (!same && std::min(std::abs(fm.d), std::abs(fp.d)) > 3.0 * tau_here)
                            continue;
                        pairs.push_back({span_t, {fm, fp}});
                    }
                std::sort(pairs.begin(), pairs.end(),
                          [](const auto& x, const auto& y) { return x.first < y.first; });
                for (const auto& [span, pr] : pairs) {
                    const auto& [fm, fp] = pr;
                    // only bridge across a genuine gap: no intermediate line
                    // may already track this crossing
                    const std::int64_t qlo = std::min(fm.q, fp.q) - 2;
                    const std::int64_t qhi = std::max(fm.q, fp.q) + 2;
                    bool tracked = false;
                    for (std::int64_t t = -(fm.t - 1); t <= fp.t - 1 && !tracked; ++t) {
                        if (t == 0) continue;
                        const std::int64_t aa = a + t * da, bb = b + t * db;
                        for (std::int64_t q : direct[static_cast<std::size_t>(fam.flat(aa, bb))])
                            if (q >= qlo && q <= qhi) tracked = true;
                    }
                    if (tracked) continue;
                    const double frac =
                        static_cast<double>(fm.t) / static_cast<double>(fm.t + fp.t);
                    std::int64_t phat = fm.q + static_cast<std::int64_t>(std::llround(
                                                   frac * static_cast<double>(fp.q - fm.q)));
                    auto& mine = fam.hits[static_cast<std::size_t>(self)];
                    bool have = false;
                    for (std::int64_t q : mine)
                        if (std::abs(q - phat) <= 3) have = true;
                    if (have) continue;
                    phat = refine_by_kink(line_values(a, b), phat, 1);
                    for (std::int64_t q : mine)
                        if (std::abs(q - phat) <= 3) have = true;
                    if (have) continue;
                    mine.push_back(phat);
                    fam.bridged[static_cast<std::size_t>(self)].push_back(1);
                }
            }
        }
    }
}

}  // namespace detail

/// Scan every axis-parallel line for jump intervals and collect the interval
/// midpoints (the Q0 cloud). Lines that the per-line rule misses but whose
/// neighbors on both sides detected compatible crossings are bridged at the
/// interpolated interval; bridged hits carry a provenance flag.
inline CrossingCloud collect_crossings(const GridFunction& g, const DetectionParams& params = {}) {
    if (g.dim() < 2) throw std::invalid_argument("collect_crossings: grid must be 2-D or 3-D");
    CrossingCloud cloud;
    cloud.grid = g.spec();
    const int n = g.N();
    const double h = g.h();
    for (int axis = 0; axis < g.dim(); ++axis) {
        detail::LineFamily fam;
        fam.axis = axis;
        fam.lines0 = n + 1;
        fam.lines1 = g.dim() == 3 ? n + 1 : 1;
        fam.hits.assign(static_cast<std::size_t>(fam.lines0 * fam.lines1), {});
        fam.diffs.assign(static_cast<std::size_t>(fam.lines0 * fam.lines1), {});
        fam.bridged.assign(static_cast<std::size_t>(fam.lines0 * fam.lines1), {});
        fam.tau_eff.assign(static_cast<std::size_t>(fam.lines0 * fam.lines1), 0.0);
        for (std::int64_t a = 0; a < fam.lines0; ++a) {
            for (std::int64_t b = 0; b < fam.lines1; ++b) {
                auto values = detail::extract_line(g, axis, a, b);
                auto hits = detail::detect_line(values, params.tau, params.max_hits_per_line);
                const std::size_t at = static_cast<std::size_t>(fam.flat(a, b));
                auto& slot = fam.hits[at];
                slot = std::move(hits);
                auto& dslot = fam.diffs[at];
                for (std::int64_t q : slot)
                    dslot.push_back(values[static_cast<std::size_t>(q + 1)] -
                                    values[static_cast<std::size_t>(q)]);
                fam.bridged[at].assign(slot.size(), 0);
                std::vector<double> absd(values.size() - 1);
                for (std::size_t t = 0; t + 1 < values.size(); ++t)
                    absd[t] = std::abs(values[t + 1] - values[t]);
                fam.tau_eff[at] = params.tau > 0.0 ? params.tau : 5.0 * detail::median(absd);
            }
        }
        if (params.bridge_gaps)
            detail::bridge_family(fam, params, [&](std::int64_t a, std::int64_t b) {
                return detail::extract_line(g, axis, a, b);
            });
        for (std::int64_t a = 0; a < fam.lines0; ++a) {
            for (std::int64_t b = 0; b < fam.lines1; ++b) {
                const auto& slot = fam.hits[static_cast<std::size_t>(fam.flat(a, b))];
                const auto& brid = fam.bridged[static_cast<std::size_t>(fam.flat(a, b))];
                for (std::size_t q = 0; q < slot.size(); ++q) {
                    CrossingHit hit;
                    hit.axis = axis;
                    hit.line = {a, b};
                    hit.interval = slot[q];
                    hit.midpoint = (static_cast<double>(slot[q]) + 0.5) * h;
                    hit.bridged = q < brid.size() && brid[q] != 0;
                    cloud.hits.push_back(hit);
                }
            }
        }
    }
    return cloud;
}

/// 1-D counterpart of collect_crossings: jump intervals on the single line.
inline CrossingCloud detect_crossings_1d(const GridFunction& g, const DetectionParams& params = {}) {
    if (g.dim() != 1) throw std::invalid_argument("detect_crossings_1d: grid must be 1-D");
    CrossingCloud cloud;
    cloud.grid = g.spec();
    auto values = detail::extract_line(g, 0, 0, 0);
    auto hits = detail::detect_line(values, params.tau, params.max_hits_per_line);
    for (std::int64_t j : hits) {
        CrossingHit hit;
        hit.axis = 0;
        hit.line = {0, 0};
        hit.interval = j;
        hit.midpoint = (static_cast<double>(j) + 0.5) * g.h();
        cloud.hits.push_back(hit);
    }
    return cloud;
}

/// Tensor-product cubic spline fitted to signed distances; its zero level
/// set is the reconstructed singularity curve/surface.
struct LevelSetSpline {
    int dim = 2;
    double knot_spacing = 0.25;
    int per_axis = 0;          ///< 1/d + 3 shifts per axis
    Eigen::VectorXd coef;      ///< lex order, x shift slowest
    double max_abs_at_cloud = 0.0;  ///< fit diagnostic over the Q0 points

    double eval(const Point& p) const {
        BsplineBlock blk[3];
        for (int a = 0; a < dim; ++a)
            blk[a] = uniform_bspline_block(4, knot_spacing, p[static_cast<std::size_t>(a)]);
        double s = 0.0;
        for (int qa = 0; qa < 4; ++qa) {
            const int ia = blk[0].first_shift + qa;
            if (ia < 1 || ia > per_axis) continue;
            if (dim == 1) {
                s += coef[ia - 1] * blk[0].v[qa];
                continue;
            }
            for (int qb = 0; qb < 4; ++qb) {
                const int ib = blk[1].first_shift + qb;
                if (ib < 1 || ib > per_axis) continue;
                const double vab = blk[0].v[qa] * blk[1].v[qb];
                if (dim == 2) {
                    s += coef[(ia - 1) * per_axis + (ib - 1)] * vab;
                    continue;
                }
                for (int qc = 0; qc < 4; ++qc) {
                    const int ic = blk[2].first_shift + qc;
                    if (ic < 1 || ic > per_axis) continue;
                    s += coef[((ia - 1) * per_axis + (ib - 1)) * per_axis + (ic - 1)] * vab *
                         blk[2].v[qc];
                }
            }
        }
        return s;
    }
};

/// Region partition of the interior grid: per-node labels 1..R (padding is
/// the sentinel 0), plus whatever classifies off-grid points: breakpoints in
/// 1-D, the level-set spline in 2-D/3-D.
struct RegionLabeling {
    GridSpec grid;
    int R = 1;
    std::shared_ptr<const LabelTensor> labels;
    std::vector<double> breakpoints;                 ///< 1-D only, sorted
    std::vector<int> segment_labels;                 ///< 1-D: label per inter-breakpoint segment
    std::shared_ptr<const LevelSetSpline> levelset;  ///< 2-D/3-D after fit_levelset
    std::shared_ptr<const LabelTensor> parity_margin;  ///< closed-surface route: votes in - out

    int label_at_node(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        if (i < 0 || i > grid.N) return 0;
        if (grid.dim >= 2 && (j < 0 || j > grid.N)) return 0;
        if (grid.dim >= 3 && (k < 0 || k > grid.N)) return 0;
        return (*labels)(i, j, k);
    }

    /// Region id of an arbitrary point. Two regions split by the sign of D
    /// (ties on the zero set go to region 1); more regions fall back to the
    /// nearest node on the same side of the zero set, lowest label first.
    int classify(const Point& p) const {
        if (R == 1) return 1;
        if (grid.dim == 1) {
            std::size_t seg = 0;
            while (seg < breakpoints.size() && p[0] >= breakpoints[seg]) ++seg;
            return segment_labels[seg];
        }
        if (!levelset) throw std::logic_error("RegionLabeling: level set not fitted");
        const double dv = levelset->eval(p);
        if (R == 2) return dv >= 0.0 ? 1 : 2;
        const bool plus = dv >= 0.0;
        const double h = grid.h();
        const auto node_of = [&](double x) {
            return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(x / h)), 0,
                                            grid.N);
        };
        const std::int64_t ci = node_of(p[0]);
        const std::int64_t cj = grid.dim >= 2 ? node_of(p[1]) : 0;
        const std::int64_t ck = grid.dim >= 3 ? node_of(p[2]) : 0;
        for (std::int64_t ring = 0; ring <= grid.N; ++ring) {
            int best_label = 0;
            double best_d2 = std::numeric_limits<double>::max();
            for (std::int64_t i = ci - ring; i <= ci + ring; ++i) {
                if (i < 0 || i > grid.N) continue;
                for (std::int64_t j = cj - ring; j <= cj + ring; ++j) {
                    if (j < 0 || j > grid.N) continue;
                    const std::int64_t kspan = grid.dim >= 3 ? ring : 0;
                    for (std::int64_t k = ck - kspan; k <= ck + kspan; ++k) {
                        if (k < 0 || k > grid.N) continue;
                        const std::int64_t cheb = std::max({std::abs(i - ci), std::abs(j - cj),
                                                            std::abs(k - ck)});
                        if (cheb != ring) continue;
                        const int lab = (*labels)(i, j, k);
                        if ((lab == 1) != plus) continue;
                        const double dx = p[0] - i * h;
                        const double dy = grid.dim >= 2 ? p[1] - j * h : 0.0;
                        const double dz = grid.dim >= 3 ? p[2] - k * h : 0.0;
                        const double d2 = dx * dx + dy * dy + dz * dz;
                        if (d2 < best_d2 || (d2 == best_d2 && lab < best_label)) {
                            best_d2 = d2;
                            best_label = lab;
                        }
                    }
                }
            }
            if (best_label != 0) return best_label;
        }
        return 1;
    }
};

/// Flood fill over grid adjacency with an edge cut exactly when a cloud
/// midpoint lies between its endpoints on the shared line. Components are
/// labeled by adjacency degree (descending), then size, so in a three-region
/// split the middle region - the one with neighbors in both others - gets
/// label 1.
inline RegionLabeling label_regions(const GridFunction& g, const CrossingCloud& cloud,
                                    int max_regions = 8) {
    const int n = g.N();
    const int dim = g.dim();
    const std::int64_t nn = n + 1;

    // cut[a](i,j,k) marks the edge from node (i,j,k) toward +axis a.
    std::array<LabelTensor, 3> cut;
    for (int a = 0; a < dim; ++a) {
        std::array<std::int64_t, 3> ext{nn, dim >= 2 ? nn : 1, dim >= 3 ? nn : 1};
        ext[static_cast<std::size_t>(a)] = n;
        cut[static_cast<std::size_t>(a)] = LabelTensor(3, ext);
    }
    for (const auto& hit : cloud.hits) {
        std::int64_t i = 0, j = 0, k = 0;
        if (hit.axis == 0) { i = hit.interval; j = hit.line[0]; k = hit.line[1]; }
        else if (hit.axis == 1) { i = hit.line[0]; j = hit.interval; k = hit.line[1]; }
        else { i = hit.line[0]; j = hit.line[1]; k = hit.interval; }
        cut[static_cast<std::size_t>(hit.axis)](i, j, k) = 1;
    }

    // Seal the staircase between crossings on adjacent parallel lines: the
    // curve segment joining two midpoints crosses every perpendicular edge
    // spanned by the interval step, and those edges must be cut too or the
    // flood fill slips through diagonal steps and bridged zones.
    {
        std::map<std::array<std::int64_t, 3>, std::vector<std::int64_t>> per_line;
        for (const auto& hit : cloud.hits)
            per_line[{hit.axis, hit.line[0], hit.line[1]}].push_back(hit.interval);
        const std::int64_t seal_window = 12;
        for (const auto& [key, intervals] : per_line) {
            const int ax = static_cast<int>(key[0]);
            for (int lc = 0; lc < dim - 1; ++lc) {
                std::array<std::int64_t, 3> nb = key;
                ++nb[static_cast<std::size_t>(1 + lc)];
                const auto other = per_line.find(nb);
                if (other == per_line.end()) continue;
                // axis along which the sealed edges run: the lc-th axis
                // other than the detection axis, in ascending order
                int edge_axis = -1;
                for (int a2 = 0, seen = 0; a2 < dim; ++a2)
                    if (a2 != ax && seen++ == lc) { edge_axis = a2; break; }
                for (std::int64_t q : intervals) {
                    std::int64_t bestq = -1, bestd = seal_window + 1;
                    for (std::int64_t q2 : other->second)
                        if (std::abs(q2 - q) < bestd) { bestd = std::abs(q2 - q); bestq = q2; }
                    if (bestq < 0) continue;
                    for (std::int64_t c = std::min(q, bestq) + 1; c <= std::max(q, bestq); ++c) {
                        std::int64_t idx[3] = {0, 0, 0};
                        idx[ax] = c;
                        int other_slot = 0;
                        for (int a2 = 0; a2 < dim; ++a2)
                            if (a2 != ax) idx[a2] = key[static_cast<std::size_t>(1 + other_slot++)];
                        cut[static_cast<std::size_t>(edge_axis)](idx[0], idx[1], idx[2]) = 1;
                    }
                }
            }
        }
    }

    auto labels = std::make_shared<LabelTensor>(dim, std::array<std::int64_t, 3>{nn, nn, nn});
    const std::int64_t jmax = dim >= 2 ? n : 0;
    const std::int64_t kmax = dim >= 3 ? n : 0;
    int comp = 0;
    std::vector<std::int64_t> comp_size;
    std::vector<std::int64_t> comp_first;
    std::deque<std::array<std::int64_t, 3>> queue;
    for (std::int64_t si = 0; si <= n; ++si)
        for (std::int64_t sj = 0; sj <= jmax; ++sj)
            for (std::int64_t sk = 0; sk <= kmax; ++sk) {
                if ((*labels)(si, sj, sk) != 0) continue;
                ++comp;
                comp_size.push_back(0);
                comp_first.push_back(labels->flat(si, sj, sk));
                queue.push_back({si, sj, sk});
                (*labels)(si, sj, sk) = comp;
                while (!queue.empty()) {
                    const auto [i, j, k] = queue.front();
                    queue.pop_front();
                    ++comp_size[static_cast<std::size_t>(comp - 1)];
                    for (int a = 0; a < dim; ++a) {
                        for (int s = -1; s <= 1; s += 2) {
                            std::int64_t ni = i, nj = j, nk = k;
                            if (a == 0) ni += s;
                            else if (a == 1) nj += s;
                            else nk += s;
                            if (ni < 0 || ni > n || nj < 0 || nj > jmax || nk < 0 || nk > kmax)
                                continue;
                            const std::int64_t ei = s > 0 ? i : ni;
                            const std::int64_t ej = s > 0 ? j : nj;
                            const std::int64_t ek = s > 0 ? k : nk;
                            if (cut[static_cast<std::size_t>(a)](ei, ej, ek)) continue;
                            if ((*labels)(ni, nj, nk) != 0) continue;
                            (*labels)(ni, nj, nk) = comp;
                            queue.push_back({ni, nj, nk});
                        }
                    }
                }
            }

    // Debris from approximate cuts shows up as slivers pinched between the
    // two families' cut bands; fold anything below 1% of the nodes into the
    // neighbor it touches most.
    {
        std::int64_t total = nn;
        for (int a = 1; a < dim; ++a) total *= nn;
        const std::int64_t floor_size = std::max<std::int64_t>(2, total / 100);
        for (;;) {
            int smallest = -1;
            for (int c = 0; c < comp; ++c)
                if (comp_size[static_cast<std::size_t>(c)] > 0 &&
                    comp_size[static_cast<std::size_t>(c)] < floor_size &&
                    (smallest < 0 || comp_size[static_cast<std::size_t>(c)] <
                                         comp_size[static_cast<std::size_t>(smallest)]))
                    smallest = c;
            if (smallest < 0) break;
            std::vector<std::int64_t> contact(static_cast<std::size_t>(comp), 0);
            for (std::int64_t i = 0; i <= n; ++i)
                for (std::int64_t j = 0; j <= jmax; ++j)
                    for (std::int64_t k = 0; k <= kmax; ++k)
                        for (int a = 0; a < dim; ++a) {
                            const std::int64_t ni = i + (a == 0), nj = j + (a == 1),
                                               nk = k + (a == 2);
                            if (ni > n || nj > jmax || nk > kmax) continue;
                            const int c1 = (*labels)(i, j, k) - 1;
                            const int c2 = (*labels)(ni, nj, nk) - 1;
                            if (c1 == smallest && c2 != smallest)
                                ++contact[static_cast<std::size_t>(c2)];
                            else if (c2 == smallest && c1 != smallest)
                                ++contact[static_cast<std::size_t>(c1)];
                        }
            int into = -1;
            for (int c = 0; c < comp; ++c)
                if (c != smallest && (into < 0 || contact[static_cast<std::size_t>(c)] >
                                                      contact[static_cast<std::size_t>(into)]))
                    into = c;
            if (into < 0 || contact[static_cast<std::size_t>(into)] == 0) break;
            for (int& v : labels->data())
                if (v == smallest + 1) v = into + 1;
            comp_size[static_cast<std::size_t>(into)] +=
                comp_size[static_cast<std::size_t>(smallest)];
            comp_size[static_cast<std::size_t>(smallest)] = 0;
        }
        // compact component ids after merging
        std::vector<int> remap(static_cast<std::size_t>(comp), 0);
        int live = 0;
        for (int c = 0; c < comp; ++c)
            if (comp_size[static_cast<std::size_t>(c)] > 0) remap[static_cast<std::size_t>(c)] = ++live;
        std::vector<std::int64_t> new_size, new_first;
        for (int c = 0; c < comp; ++c)
            if (comp_size[static_cast<std::size_t>(c)] > 0) {
                new_size.push_back(comp_size[static_cast<std::size_t>(c)]);
                new_first.push_back(comp_first[static_cast<std::size_t>(c)]);
            }
        for (int& v : labels->data()) v = remap[static_cast<std::size_t>(v - 1)];
        comp = live;
        comp_size = std::move(new_size);
        comp_first = std::move(new_first);
    }

    if (comp > max_regions)
        throw std::runtime_error("label_regions: region count " + std::to_string(comp) +
                                 " exceeds the configured maximum " + std::to_string(max_regions));

    // Adjacency degree: components joined by any (necessarily cut) grid edge.
    std::vector<std::vector<unsigned char>> adj(static_cast<std::size_t>(comp),
                                                std::vector<unsigned char>(
                                                    static_cast<std::size_t>(comp), 0));
    for (std::int64_t i = 0; i <= n; ++i)
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k)
                for (int a = 0; a < dim; ++a) {
                    std::int64_t ni = i + (a == 0), nj = j + (a == 1), nk = k + (a == 2);
                    if (ni > n || nj > jmax || nk > kmax) continue;
                    const int c1 = (*labels)(i, j, k), c2 = (*labels)(ni, nj, nk);
                    if (c1 != c2) {
                        adj[static_cast<std::size_t>(c1 - 1)][static_cast<std::size_t>(c2 - 1)] = 1;
                        adj[static_cast<std::size_t>(c2 - 1)][static_cast<std::size_t>(c1 - 1)] = 1;
                    }
                }
    std::vector<int> order(static_cast<std::size_t>(comp));
    for (int c = 0; c < comp; ++c) order[static_cast<std::size_t>(c)] = c;
    auto degree = [&](int c) {
        int d = 0;
        for (int o = 0; o < comp; ++o) d += adj[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
        return d;
    };
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const int dx = degree(x), dy = degree(y);
        if (dx != dy) return dx > dy;
        if (comp_size[static_cast<std::size_t>(x)] != comp_size[static_cast<std::size_t>(y)])
            return comp_size[static_cast<std::size_t>(x)] > comp_size[static_cast<std::size_t>(y)];
        return comp_first[static_cast<std::size_t>(x)] < comp_first[static_cast<std::size_t>(y)];
    });
    std::vector<int> relabel(static_cast<std::size_t>(comp));
    for (int rank = 0; rank < comp; ++rank)
        relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = rank + 1;
    for (int& v : labels->data()) v = relabel[static_cast<std::size_t>(v - 1)];

    RegionLabeling out;
    out.grid = g.spec();
    out.R = comp;
    out.labels = std::move(labels);
    return out;
}

/// Breakpoints and per-segment labels for a 1-D labeling, derived from the
/// detected midpoints, so classify() can place arbitrary coordinates.
inline void attach_breakpoints_1d(RegionLabeling& labeling, const CrossingCloud& cloud) {
    if (labeling.grid.dim != 1) throw std::invalid_argument("attach_breakpoints_1d: 1-D only");
    labeling.breakpoints.clear();
    for (const auto& hit : cloud.hits) labeling.breakpoints.push_back(hit.midpoint);
    std::sort(labeling.breakpoints.begin(), labeling.breakpoints.end());
    labeling.segment_labels.clear();
    const double h = labeling.grid.h();
    const std::int64_t n = labeling.grid.N;
    for (std::size_t s = 0; s <= labeling.breakpoints.size(); ++s) {
        const std::int64_t lo =
            s == 0 ? 0
                   : static_cast<std::int64_t>(std::ceil(labeling.breakpoints[s - 1] / h));
        const std::int64_t hi =
            s == labeling.breakpoints.size()
                ? n
                : static_cast<std::int64_t>(std::floor(labeling.breakpoints[s] / h));
        const std::int64_t rep = std::clamp<std::int64_t>((lo + hi) / 2, 0, n);
        labeling.segment_labels.push_back(labeling.label_at_node(rep));
    }
}

/// Weighted least-squares fit of the signed-distance cubic spline D over the
/// m_Q^dim net Q (signed Euclidean distance to the cloud, + on region 1) and
/// the cloud itself (value 0, weight q0_weight). Requires d_D > 1/m_Q, the
/// stated non-singularity condition for the net alone.
inline LevelSetSpline fit_levelset(const CrossingCloud& cloud, const RegionLabeling& labeling,
                                   int net_size, double knot_spacing, double q0_weight = 1.0,
                                   double trunc_tol = 1e-12,
                                   const std::vector<Point>* extra_dist_set = nullptr) {
    const int dim = labeling.grid.dim;
    if (dim < 2) throw std::invalid_argument("fit_levelset: needs a 2-D or 3-D grid");
    if (net_size < 2) throw std::invalid_argument("fit_levelset: net must have >= 2 points per axis");
    if (!(knot_spacing > 1.0 / net_size))
        throw std::invalid_argument("fit_levelset: requires knot spacing d > 1/net_size");
    LevelSetSpline D;
    D.dim = dim;
    D.knot_spacing = knot_spacing;
    D.per_axis = basis_count(knot_spacing, 4);

    const auto cloud_pts = cloud.points();
    if (cloud_pts.empty()) throw std::invalid_argument("fit_levelset: empty crossing cloud");
    const double h = labeling.grid.h();
    const int n = labeling.grid.N;

    auto dist_to_cloud = [&](const Point& p) {
        double best = std::numeric_limits<double>::max();
        for (const auto& q : cloud_pts) {
            const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        if (extra_dist_set)
            for (const auto& q : *extra_dist_set) {
                const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
                best = std::min(best, dx * dx + dy * dy + dz * dz);
            }
        return std::sqrt(best);
    };

    std::vector<Point> pts;
    std::vector<double> vals, weights;
    const auto net_node = [&](int t) {
        const double target = static_cast<double>(t) / (net_size - 1);
        return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(target / h)), 0, n);
    };
    for (int ti = 0; ti < net_size; ++ti)
        for (int tj = 0; tj < net_size; ++tj)
            for (int tk = 0; tk < (dim == 3 ? net_size : 1); ++tk) {
                const std::int64_t i = net_node(ti), j = net_node(tj);
                const std::int64_t k = dim == 3 ? net_node(tk) : 0;
                Point p{i * h, j * h, dim == 3 ? k * h : 0.0};
                const int lab = labeling.label_at_node(i, j, k);
                const double sgn = lab == 1 ? 1.0 : -1.0;
                pts.push_back(p);
                vals.push_back(sgn * dist_to_cloud(p));
                weights.push_back(1.0);
            }
    for (const auto& q : cloud_pts) {
        pts.push_back(q);
        vals.push_back(0.0);
        weights.push_back(q0_weight);
    }

    std::int64_t cols = D.per_axis;
    for (int a = 1; a < dim; ++a) cols *= D.per_axis;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pts.size()), cols);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t r = 0; r < pts.size(); ++r) {
        const double sw = std::sqrt(weights[r]);
        rhs[static_cast<Eigen::Index>(r)] = sw * vals[r];
        BsplineBlock blk[3];
        for (int a = 0; a < dim; ++a)
            blk[a] = uniform_bspline_block(4, knot_spacing, pts[r][static_cast<std::size_t>(a)]);
        for (int qa = 0; qa < 4; ++qa) {
            const int ia = blk[0].first_shift + qa;
            if (ia < 1 || ia > D.per_axis) continue;
            for (int qb = 0; qb < 4; ++qb) {
                const int ib = blk[1].first_shift + qb;
                if (ib < 1 || ib > D.per_axis) continue;
                const double vab = blk[0].v[qa] * blk[1].v[qb];
                if (dim == 2) {
                    M(static_cast<Eigen::Index>(r), (ia - 1) * D.per_axis + (ib - 1)) = sw * vab;
                    continue;
                }
                for (int qc = 0; qc < 4; ++qc) {
                    const int ic = blk[2].first_shift + qc;
                    if (ic < 1 || ic > D.per_axis) continue;
                    M(static_cast<Eigen::Index>(r),
                      ((ia - 1) * D.per_axis + (ib - 1)) * D.per_axis + (ic - 1)) =
                        sw * vab * blk[2].v[qc];
                }
            }
        }
    }

    GramAccumulator acc(cols);
    acc.add_rows(M, rhs);
    NormalSystem sys = acc.finish(trunc_tol);
    SolveReport rep = solve_normal_system(sys, 2);
    D.coef = rep.a;
    double worst = 0.0;
    for (const auto& q : cloud_pts) worst = std::max(worst, std::abs(D.eval(q)));
    D.max_abs_at_cloud = worst;
    return D;
}

inline std::vector<Point> levelset_zero_points(const LevelSetSpline& D, double x_max,
                                               int samples_per_axis);

/// Two-region labeling for a closed singular surface: lines crossing the
/// surface twice vote their between-hits segment "inside"; the level-set
/// spline fitted to the provisional split settles nodes whose lines abstain
/// or disagree. This mirrors the 3-D construction where the partition is
/// the sign of D, while keeping cell-exact boundaries wherever lines
/// actually detected their crossings.
inline RegionLabeling label_closed_surface(const GridFunction& g, const CrossingCloud& cloud,
                                           int net_size, double knot_spacing, double q0_weight,
                                           double trunc_tol = 1e-12) {
    const GridSpec& gs = g.spec();
    const int n = gs.N;
    const std::int64_t nn = n + 1;
    const int dim = gs.dim;
    if (dim < 2) throw std::invalid_argument("label_closed_surface: needs a 2-D or 3-D grid");

    std::map<std::array<std::int64_t, 3>, std::vector<std::int64_t>> per_line;
    for (const auto& hit : cloud.hits)
        per_line[{hit.axis, hit.line[0], hit.line[1]}].push_back(hit.interval);

    LabelTensor votes_in(dim, {nn, nn, nn}), votes_out(dim, {nn, nn, nn});
    for (auto& [key, intervals] : per_line) {
        if (intervals.size() != 2) continue;
        std::sort(intervals.begin(), intervals.end());
        if (intervals[1] - intervals[0] < 3) continue;  // chords and doubled fires abstain
        const int ax = static_cast<int>(key[0]);
        for (std::int64_t t = 0; t <= n; ++t) {
            std::int64_t idx[3] = {0, 0, 0};
            idx[ax] = t;
            int slot = 0;
            for (int a2 = 0; a2 < dim; ++a2)
                if (a2 != ax) idx[a2] = key[static_cast<std::size_t>(1 + slot++)];
            const bool inside = t > intervals[0] && t <= intervals[1];
            (inside ? votes_in : votes_out)(idx[0], idx[1], idx[2]) += 1;
        }
    }

    auto labels = std::make_shared<LabelTensor>(dim, std::array<std::int64_t, 3>{nn, nn, nn}, 1);
    std::int64_t inside_count = 0;
    const std::int64_t jmax = dim >= 2 ? n : 0;
    const std::int64_t kmax = dim >= 3 ? n : 0;
    for (std::int64_t i = 0; i <= n; ++i)
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k)
                if (votes_in(i, j, k) > votes_out(i, j, k)) {
                    (*labels)(i, j, k) = 2;
                    ++inside_count;
                }
    std::int64_t total = nn;
    for (int a = 1; a < dim; ++a) total *= nn;
    if (inside_count < total / 1000 || inside_count > total - total / 1000)
        throw std::runtime_error("label_closed_surface: crossing votes did not split the grid");

    RegionLabeling lab;
    lab.grid = gs;
    lab.R = 2;
    lab.labels = labels;
    // two passes: distances measured against the cloud alone overestimate
    // near detection holes and warp the zero set there, so the net values
    // are remeasured against the first pass's zero surface as well
    auto D = std::make_shared<LevelSetSpline>(
        fit_levelset(cloud, lab, net_size, knot_spacing, q0_weight, trunc_tol));
    {
        const auto zero = levelset_zero_points(*D, gs.x_max(), 2 * n + 1);
        if (!zero.empty())
            D = std::make_shared<LevelSetSpline>(fit_levelset(
                cloud, lab, net_size, knot_spacing, q0_weight, trunc_tol, &zero));
    }

    // final pass: parity from a pair of separated crossings is cell-exact
    // except at the segment rims, where a detected interval can be off by a
    // cell (and a bridged fill by two), so rim nodes abstain with a width
    // set by the hits' provenance; decisive majorities stand and everything
    // else takes the sign of D
    struct SegInfo {
        std::int64_t q0, q1;  ///< q1 < 0: single detected crossing
        std::int64_t rim;
    };
    std::map<std::array<std::int64_t, 3>, SegInfo> segments, segments_direct;
    {
        std::map<std::array<std::int64_t, 3>, std::vector<std::pair<std::int64_t, bool>>> all;
        for (const auto& hit : cloud.hits)
            all[{hit.axis, hit.line[0], hit.line[1]}].push_back({hit.interval, hit.bridged});
        for (auto& [key, hv] : all) {
            std::sort(hv.begin(), hv.end());
            if (hv.size() == 2) {
                const std::int64_t rim = (hv[0].second || hv[1].second) ? 3 : 2;
                if (hv[1].first - hv[0].first < 2 * rim) continue;
                segments[key] = {hv[0].first, hv[1].first, rim};
                if (!hv[0].second && !hv[1].second)
                    segments_direct[key] = {hv[0].first, hv[1].first, 2};
            }
        }
    }
    auto margin_in = [&](const std::map<std::array<std::int64_t, 3>, SegInfo>& segs,
                         std::int64_t i, std::int64_t j, std::int64_t k) {
        const std::array<std::array<std::int64_t, 3>, 3> keys = {{{0, j, k}, {1, i, k}, {2, i, j}}};
        const std::int64_t coord[3] = {i, j, k};
        int vin = 0, vout = 0;
        for (int a = 0; a < dim; ++a) {
            const auto it = segs.find(keys[static_cast<std::size_t>(a)]);
            if (it == segs.end()) continue;
            const auto& sg = it->second;
            if (coord[a] >= sg.q0 + sg.rim && coord[a] <= sg.q1 - sg.rim + 1) ++vin;
            else if (coord[a] <= sg.q0 - sg.rim + 1 || coord[a] >= sg.q1 + sg.rim) ++vout;
        }
        return vin - vout;
    };
    auto parity_margin_at = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
        return margin_in(segments, i, j, k);
    };
    auto final_labels = std::make_shared<LabelTensor>(dim, std::array<std::int64_t, 3>{nn, nn, nn});
    auto margins = std::make_shared<LabelTensor>(dim, std::array<std::int64_t, 3>{nn, nn, nn});
    const double h = gs.h();
    for (std::int64_t i = 0; i <= n; ++i)
        for (std::int64_t j = 0; j <= jmax; ++j)
            for (std::int64_t k = 0; k <= kmax; ++k) {
                const int margin = parity_margin_at(i, j, k);
                (*margins)(i, j, k) = margin_in(segments_direct, i, j, k);
                int lab_ijk;
                if (margin > 0) lab_ijk = 2;
                else if (margin < 0) lab_ijk = 1;
                else {
                    const Point p{i * h, dim >= 2 ? j * h : 0.0, dim >= 3 ? k * h : 0.0};
                    lab_ijk = D->eval(p) >= 0.0 ? 1 : 2;
                }
                (*final_labels)(i, j, k) = lab_ijk;
            }
    lab.labels = std::move(final_labels);
    lab.parity_margin = std::move(margins);
    lab.levelset = std::move(D);
    return lab;
}

/// Rewrite node labels near bridged hits using the fitted level set. Flood
/// fill is cell-exact where detection was confident, but bridged cuts are
/// only interpolation-accurate; the globally smooth D places the boundary
/// to a fraction of a cell there, and in those zones the jump is small, so
/// a sub-cell relabel costs next to nothing in data consistency.
inline RegionLabeling refine_labels_by_levelset(const RegionLabeling& labeling,
                                                const CrossingCloud& cloud, int width = 3) {
    if (!labeling.levelset || labeling.R < 2) return labeling;
    const GridSpec& gs = labeling.grid;
    const double h = gs.h();
    auto labels = std::make_shared<LabelTensor>(*labeling.labels);
    RegionLabeling out = labeling;
    const std::int64_t jmax = gs.dim >= 2 ? gs.N : 0;
    const std::int64_t kmax = gs.dim >= 3 ? gs.N : 0;
    for (const auto& hit : cloud.hits) {
        if (!hit.bridged) continue;
        const Point c = cloud.position(hit);
        const std::int64_t ci = static_cast<std::int64_t>(std::llround(c[0] / h));
        const std::int64_t cj = static_cast<std::int64_t>(std::llround(c[1] / h));
        const std::int64_t ck = gs.dim >= 3 ? static_cast<std::int64_t>(std::llround(c[2] / h)) : 0;
        for (std::int64_t i = std::max<std::int64_t>(0, ci - width);
             i <= std::min<std::int64_t>(gs.N, ci + width); ++i)
            for (std::int64_t j = std::max<std::int64_t>(0, cj - width);
                 j <= std::min(jmax, cj + width); ++j)
                for (std::int64_t k = std::max<std::int64_t>(0, ck - width);
                     k <= std::min(kmax, ck + width); ++k) {
                    const Point p{i * h, gs.dim >= 2 ? j * h : 0.0, gs.dim >= 3 ? k * h : 0.0};
                    (*labels)(i, j, k) = labeling.classify(p);
                }
    }
    out.labels = std::move(labels);
    return out;
}

/// Points where D crosses zero along axis-parallel sampling lines (linear
/// interpolation between lattice samples); used for export and curve tests.
inline std::vector<Point> levelset_zero_points(const LevelSetSpline& D, double x_max,
                                               int samples_per_axis) {
    std::vector<Point> out;
    const int s = samples_per_axis;
    const double step = x_max / (s - 1);
    const int bmax = D.dim == 3 ? s : 1;
    for (int axis = 0; axis < D.dim; ++axis) {
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < bmax; ++b) {
                const double other[2] = {a * step, b * step};
                double prev = 0.0;
                for (int t = 0; t < s; ++t) {
                    Point p{0.0, 0.0, 0.0};
                    int oidx = 0;
                    for (int ax = 0; ax < D.dim; ++ax) {
                        if (ax == axis) p[static_cast<std::size_t>(ax)] = t * step;
                        else p[static_cast<std::size_t>(ax)] = other[oidx++];
                    }
                    const double v = D.eval(p);
                    if (t > 0 && ((prev < 0.0 && v >= 0.0) || (prev >= 0.0 && v < 0.0))) {
                        const double frac = prev / (prev - v);
                        Point z = p;
                        z[static_cast<std::size_t>(axis)] = (t - 1) * step + frac * step;
                        out.push_back(z);
                    }
                    prev = v;
                }
            }
        }
    }
    return out;
}

}  // namespace sigfit
