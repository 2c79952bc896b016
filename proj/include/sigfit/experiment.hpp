#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigfit/correct.hpp"
#include "sigfit/csv.hpp"
#include "sigfit/detect.hpp"
#include "sigfit/fit.hpp"
#include "sigfit/parallel.hpp"
#include "sigfit/serialize.hpp"
#include "sigfit/testfunctions.hpp"

namespace sigfit {

inline constexpr const char* kVersion = "0.1.0";

/// Flat key=value run configuration; presets mirror the shipped experiments.
struct ExperimentConfig {
    std::string function = "example1d";  ///< test function id or csv:<path>
    int N = 101;
    int pad = -1;  ///< -1: derived from the signature stencil reach
    std::string signature = "forward:5";  ///< forward:k | biharmonic | axis:m
    std::string basis = "bspline:6:0.1";  ///< bspline:m:d | chebyshev:n
    double tau = -1.0;                    ///< detection threshold; <=0 auto
    int max_hits = 1;
    int bridge = 1;
    int mq = 9;
    double dd = 0.25;
    double q0_weight = 1.0;
    std::string correction = "spline:4";  ///< spline:p | quasi:l
    double solver_tol = 1e-12;
    int refine_iters = 3;
    double anchor_weight = 0.1;   ///< weight of censored-shell value anchors (3-D route)
    double censor_band = 0.75;     ///< half-width of the censored |D| shell, in cells (3-D route)
    int fine_factor = 4;
    std::string eval_mode = "exact";  ///< exact | detected
    int threads = 1;
    int max_regions = 8;
    std::string out = "out";
    std::uint64_t seed = 0;  ///< reserved; recorded but unused (pipeline has no randomness)

    static const std::vector<std::string>& key_order() {
        static const std::vector<std::string> keys = {
            "function", "N", "pad", "signature", "basis", "tau", "max_hits", "bridge",
            "mq", "dd", "q0_weight", "correction", "solver_tol", "refine_iters",
            "anchor_weight", "censor_band", "fine_factor", "eval_mode", "threads", "max_regions", "out", "seed"};
        return keys;
    }

    void set(const std::string& key, const std::string& value) {
        if (key == "function") function = value;
        else if (key == "N") N = std::stoi(value);
        else if (key == "pad") pad = std::stoi(value);
        else if (key == "signature") signature = value;
        else if (key == "basis") basis = value;
        else if (key == "tau") tau = std::stod(value);
        else if (key == "max_hits") max_hits = std::stoi(value);
        else if (key == "bridge") bridge = std::stoi(value);
        else if (key == "mq") mq = std::stoi(value);
        else if (key == "dd") dd = std::stod(value);
        else if (key == "q0_weight") q0_weight = std::stod(value);
        else if (key == "correction") correction = value;
        else if (key == "solver_tol") solver_tol = std::stod(value);
        else if (key == "refine_iters") refine_iters = std::stoi(value);
        else if (key == "anchor_weight") anchor_weight = std::stod(value);
        else if (key == "censor_band") censor_band = std::stod(value);
        else if (key == "fine_factor") fine_factor = std::stoi(value);
        else if (key == "eval_mode") eval_mode = value;
        else if (key == "threads") threads = std::stoi(value);
        else if (key == "max_regions") max_regions = std::stoi(value);
        else if (key == "out") out = value;
        else if (key == "seed") seed = std::stoull(value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    std::string get(const std::string& key) const {
        if (key == "function") return function;
        if (key == "N") return std::to_string(N);
        if (key == "pad") return std::to_string(pad);
        if (key == "signature") return signature;
        if (key == "basis") return basis;
        if (key == "tau") return csvio::fmt(tau);
        if (key == "max_hits") return std::to_string(max_hits);
        if (key == "bridge") return std::to_string(bridge);
        if (key == "mq") return std::to_string(mq);
        if (key == "dd") return csvio::fmt(dd);
        if (key == "q0_weight") return csvio::fmt(q0_weight);
        if (key == "correction") return correction;
        if (key == "solver_tol") return csvio::fmt(solver_tol);
        if (key == "refine_iters") return std::to_string(refine_iters);
        if (key == "anchor_weight") return csvio::fmt(anchor_weight);
        if (key == "censor_band") return csvio::fmt(censor_band);
        if (key == "fine_factor") return std::to_string(fine_factor);
        if (key == "eval_mode") return eval_mode;
        if (key == "threads") return std::to_string(threads);
        if (key == "max_regions") return std::to_string(max_regions);
        if (key == "out") return out;
        if (key == "seed") return std::to_string(seed);
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    /// Canonical text form: every key once, fixed order.
    std::string emit() const {
        std::ostringstream os;
        for (const auto& k : key_order()) os << k << "=" << get(k) << "\n";
        return os.str();
    }

    static ExperimentConfig parse(const std::string& text) {
        ExperimentConfig cfg;
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
            std::size_t at = 0;
            while (at < line.size() && line[at] == ' ') ++at;
            if (at >= line.size()) continue;
            const auto eq = line.find('=', at);
            if (eq == std::string::npos)
                throw std::invalid_argument("config: expected key=value, got '" + line + "'");
            cfg.set(line.substr(at, eq - at), line.substr(eq + 1));
        }
        return cfg;
    }

    static ExperimentConfig preset(const std::string& name) {
        ExperimentConfig c;
        if (name == "smoke") {
            c.function = "splinecase1d";
            c.N = 21;
            c.signature = "forward:4";
            c.basis = "bspline:4:0.25";
            c.correction = "spline:4";
            c.fine_factor = 4;
        } else if (name == "paper-1d") {
            c.function = "example1d";
            c.N = 101;
            c.signature = "forward:5";
            c.basis = "bspline:6:0.1";
            c.correction = "spline:4";
            c.fine_factor = 10;
        } else if (name == "paper-2d") {
            c.function = "example2d";
            c.N = 101;
            c.signature = "biharmonic";
            c.basis = "bspline:6:0.1";
            c.max_hits = 1;
            c.mq = 9;
            c.dd = 0.25;
            c.q0_weight = 1.0;
            c.correction = "spline:6";
            c.fine_factor = 4;
            c.solver_tol = 1e-14;
        } else if (name == "paper-2curves") {
            c.function = "twocurves2d";
            c.N = 101;
            c.signature = "biharmonic";
            c.basis = "bspline:6:0.1";
            c.max_hits = 2;
            c.mq = 11;
            c.dd = 0.2;
            c.q0_weight = 100.0;
            c.correction = "spline:6";
            c.fine_factor = 4;
            c.solver_tol = 1e-14;
        } else if (name == "paper-3d") {
            c.function = "example3d";
            c.N = 41;
            c.signature = "axis:4";
            c.basis = "chebyshev:8";
            c.max_hits = 2;
            c.mq = 11;
            c.dd = 0.2;
            c.q0_weight = 1.0;
            c.correction = "spline:4";
            c.fine_factor = 4;
            c.solver_tol = 1e-14;
        } else if (name == "paper-3d-reduced") {
            c = preset("paper-3d");
            c.N = 33;
            c.basis = "chebyshev:6";
        } else {
            throw std::invalid_argument("unknown preset: " + name);
        }
        return c;
    }
};

inline SignatureSpec parse_signature_spec(const std::string& s) {
    SignatureSpec spec;
    if (s == "biharmonic") {
        spec.kind = SignatureKind::biharmonic;
        spec.order = 2;
        return spec;
    }
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("signature spec: expected forward:k, biharmonic or axis:m");
    const std::string kind = s.substr(0, colon);
    const int order = std::stoi(s.substr(colon + 1));
    if (kind == "forward") spec.kind = SignatureKind::forward_diff_k;
    else if (kind == "axis") spec.kind = SignatureKind::per_axis_diff;
    else throw std::invalid_argument("signature spec: unknown kind '" + kind + "'");
    spec.order = order;
    return spec;
}

inline TensorBasis parse_basis(const std::string& s, int dim) {
    const auto c1 = s.find(':');
    if (c1 == std::string::npos) throw std::invalid_argument("basis spec: expected kind:params");
    const std::string kind = s.substr(0, c1);
    if (kind == "chebyshev") return TensorBasis::chebyshev(dim, std::stoi(s.substr(c1 + 1)));
    if (kind == "bspline") {
        const auto c2 = s.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw std::invalid_argument("basis spec: expected bspline:m:d");
        return TensorBasis::bspline(dim, std::stoi(s.substr(c1 + 1, c2 - c1 - 1)),
                                    std::stod(s.substr(c2 + 1)));
    }
    throw std::invalid_argument("basis spec: unknown kind '" + kind + "'");
}

inline CorrectionOperator parse_correction(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("correction spec: expected spline:p or quasi:l");
    const std::string kind = s.substr(0, colon);
    const int v = std::stoi(s.substr(colon + 1));
    if (kind == "spline") return CorrectionOperator::spline(v);
    if (kind == "quasi") return CorrectionOperator::quasi(v);
    throw std::invalid_argument("correction spec: unknown kind '" + kind + "'");
}

struct RunResult {
    int regions = 1;
    std::size_t cloud_size = 0;
    std::size_t bridged_hits = 0;
    std::int64_t columns = 0;
    std::int64_t zero_columns = 0;
    int rank = -1;
    double residual_sq = 0.0;
    double levelset_max_at_cloud = 0.0;
    double first_stage_max = 0.0;  ///< max |f - S*| over grid nodes
    double corrected_max = 0.0;    ///< max |f - f~| over the fine lattice
    std::array<double, 3> zone_max{0.0, 0.0, 0.0};  ///< boundary, singular, elsewhere
    double improvement_ratio = 0.0;
    double sig_interior_max = 0.0;  ///< 1-D only: smooth-interior signature magnitude
    double runtime_sec = 0.0;

    std::shared_ptr<const PiecewiseApproximant> approximant;
    std::shared_ptr<const RegionLabeling> labeling;
    std::vector<Point> cloud_points;
    std::optional<ErrorField> corrected_field;
    std::optional<ErrorField> first_stage_field;
};

/// Full pipeline for one configuration: sample (or load), detect and label,
/// fit the level set, match signatures, correct, and measure.
inline RunResult run_experiment(const ExperimentConfig& cfg, bool keep_fields = false) {
    const auto t0 = std::chrono::steady_clock::now();
    max_threads() = cfg.threads;

    const SignatureSpec sigspec = parse_signature_spec(cfg.signature);
    const int pad = cfg.pad > 0 ? pad_width_for(sigspec.stencil_reach(), cfg.pad)
                                : pad_width_for(sigspec.stencil_reach());

    std::optional<TestFunction> tf;
    GridFunction g;
    if (cfg.function.rfind("csv:", 0) == 0) {
        g = csvio::read_grid_csv(cfg.function.substr(4));
        if (g.pad() < sigspec.stencil_reach())
            throw std::invalid_argument("run: csv grid padding below the signature stencil reach");
    } else {
        tf = testfn::by_id(cfg.function);
        g = sample(*tf, GridSpec(tf->dim(), cfg.N, pad));
    }
    const int dim = g.dim();
    if (sigspec.expected_dim() != dim)
        throw std::invalid_argument("run: signature kind does not match function dimension");

    DetectionParams det;
    det.tau = cfg.tau;
    det.max_hits_per_line = cfg.max_hits;
    det.bridge_gaps = cfg.bridge != 0;
    det.max_regions = cfg.max_regions;

    RunResult res;
    CrossingCloud cloud = dim == 1 ? detect_crossings_1d(g, det) : collect_crossings(g, det);
    std::shared_ptr<RegionLabeling> labeling;
    if (dim == 3 && cfg.max_hits >= 2 && !cloud.hits.empty()) {
        // closed-surface route: the partition is the sign of D, with
        // cell-exact overrides where lines detected both crossings
        labeling = std::make_shared<RegionLabeling>(label_closed_surface(
            g, cloud, cfg.mq, cfg.dd, cfg.q0_weight, cfg.solver_tol));
        res.levelset_max_at_cloud = labeling->levelset->max_abs_at_cloud;
    } else {
        labeling = std::make_shared<RegionLabeling>(label_regions(g, cloud, cfg.max_regions));
        if (dim == 1) attach_breakpoints_1d(*labeling, cloud);
        if (dim >= 2 && labeling->R >= 2 && !cloud.hits.empty()) {
            auto D = std::make_shared<LevelSetSpline>(
                fit_levelset(cloud, *labeling, cfg.mq, cfg.dd, cfg.q0_weight, cfg.solver_tol));
            res.levelset_max_at_cloud = D->max_abs_at_cloud;
            labeling->levelset = std::move(D);
            *labeling = refine_labels_by_levelset(*labeling, cloud);
        }
    }
    res.regions = labeling->R;
    res.cloud_points = cloud.points();
    res.cloud_size = cloud.hits.size();
    for (const auto& hit : cloud.hits)
        if (hit.bridged) ++res.bridged_hits;

    const TensorBasis basis = parse_basis(cfg.basis, dim);

    // Near a closed surface the label is genuinely ambiguous exactly where
    // no line detected a crossing (the jump is too weak there). Whatever
    // side such a node is assigned, its value poisons the signature match
    // with an O(jump) inconsistency; censoring it - sentinel label plus a
    // zeroed data copy - removes the node from both sides of the discrete
    // inner products, which is consistent because the restricted columns
    // vanish there too.
    GridFunction g_fit = g;
    ValueAnchors anchors;
    if (dim == 3 && labeling->levelset && labeling->R == 2 && labeling->parity_margin) {
        // Near the surface only agreement between the crossing parity and
        // the sign of D is trusted; the rest of the |D| <= 0.75h shell is
        // censored out of the signature match (a censored node's value and
        // all restricted columns vanish there, keeping every stencil
        // consistent), with weak value anchors available to pin the freed
        // directions.
        auto labels2 = std::make_shared<LabelTensor>(*labeling->labels);
        const double band = cfg.censor_band * g.h();
        std::int64_t censored = 0;
        for (std::int64_t i = 0; i <= g.N(); ++i)
            for (std::int64_t j = 0; j <= g.N(); ++j)
                for (std::int64_t k = 0; k <= g.N(); ++k) {
                    const Point p = g.node(i, j, k);
                    const double dv = labeling->levelset->eval(p);
                    if (std::abs(dv) > band) continue;
                    const int margin = (*labeling->parity_margin)(i, j, k);
                    const int by_vote = margin > 0 ? 2 : (margin < 0 ? 1 : 0);
                    const int by_d = dv >= 0.0 ? 1 : 2;
                    // a two-line majority survives a single off-by-one hit;
                    // a single-line vote needs D on its side; and right at
                    // the reconstructed surface nothing is trusted
                    if (std::abs(dv) > 0.25 * g.h() &&
                        (std::abs(margin) >= 2 || (by_vote != 0 && by_vote == by_d))) {
                        (*labels2)(i, j, k) = by_vote;
                        continue;
                    }
                    (*labels2)(i, j, k) = 0;
                    g_fit(i, j, k) = 0.0;
                    ++censored;
                    // the quarter-cell sliver stays unanchored (its side is a
                    // coin flip and the jump there can be large); censored
                    // pocket nodes farther out carry weak jumps, so a value
                    // anchor on the D side is safe
                    if (std::abs(dv) > 0.25 * g.h()) {
                        anchors.points.push_back(p);
                        anchors.regions.push_back(by_d);
                        anchors.values.push_back(g(i, j, k));
                    }
                }
        anchors.weight = cfg.anchor_weight;
        if (censored > 0) {
            auto refined = std::make_shared<RegionLabeling>(*labeling);
            refined->labels = std::move(labels2);
            labeling = std::move(refined);
        }
    }

    auto approx = std::make_shared<PiecewiseApproximant>(
        first_stage(g_fit, labeling, basis, sigspec, cfg.solver_tol, cfg.refine_iters,
                    anchors.size() ? &anchors : nullptr));

    // Second pass for the censored shell: the censored fit is internally
    // consistent, so its branch values are trustworthy comparators; each
    // censored node joins the branch that clearly explains its value and the
    // system is solved once more with those rows restored.
    if (dim == 3 && labeling->R == 2) {
        auto labels3 = std::make_shared<LabelTensor>(*labeling->labels);
        GridFunction g_fit2 = g;
        std::int64_t assigned = 0, still = 0;
        for (std::int64_t i = 0; i <= g.N(); ++i)
            for (std::int64_t j = 0; j <= g.N(); ++j)
                for (std::int64_t k = 0; k <= g.N(); ++k) {
                    if ((*labels3)(i, j, k) != 0) continue;
                    const Point p = g.node(i, j, k);
                    const double e1 = std::abs(g(i, j, k) - approx->eval_region(1, p));
                    const double e2 = std::abs(g(i, j, k) - approx->eval_region(2, p));
                    if (2.0 * e1 < e2) { (*labels3)(i, j, k) = 1; ++assigned; }
                    else if (2.0 * e2 < e1) { (*labels3)(i, j, k) = 2; ++assigned; }
                    else { g_fit2(i, j, k) = 0.0; ++still; }
                }
        if (assigned > 0) {
            auto refined = std::make_shared<RegionLabeling>(*labeling);
            refined->labels = std::move(labels3);
            labeling = std::move(refined);
            approx = std::make_shared<PiecewiseApproximant>(first_stage(
                g_fit2, labeling, basis, sigspec, cfg.solver_tol, cfg.refine_iters));
        }
    }

    res.columns = labeling->R * basis.size();
    res.zero_columns = approx->zero_column_count;
    res.rank = approx->rank;
    res.residual_sq = approx->residual_sq;

    const GridFunction e = residual(g, *approx);
    double fs_max = 0.0;
    e.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t k) {
        fs_max = std::max(fs_max, std::abs(e(i, j, k)));
    });
    res.first_stage_max = fs_max;

    if (dim == 1) {
        const Signature data_sig = compute_signature(g, sigspec);
        res.sig_interior_max = interior_max_1d(data_sig, labeling->breakpoints,
                                               2.0 * sigspec.order * g.h());
    }

    const CorrectionOperator op = parse_correction(cfg.correction);
    const EvalMode mode =
        (tf && cfg.eval_mode == "exact") ? EvalMode::exact : EvalMode::detected;
    CorrectedApproximant fa = corrected(g, approx, op, mode, tf ? &*tf : nullptr);

    std::vector<Point> singular_ref = res.cloud_points;
    if (dim == 1)
        for (double b : labeling->breakpoints) singular_ref.push_back({b, 0.0, 0.0});
    const double zone_width = basis.order() * g.h();

    if (tf) {
        ErrorField field = error_report(*tf, fa, cfg.fine_factor, zone_width, singular_ref);
        res.corrected_max = field.max_abs;
        res.zone_max = field.zone_max;
        res.improvement_ratio = field.max_abs > 0.0 ? fs_max / field.max_abs
                                                    : std::numeric_limits<double>::infinity();
        if (keep_fields) res.corrected_field = std::move(field);
    }
    if (keep_fields) res.first_stage_field = field_from_grid(e, zone_width, singular_ref);

    res.approximant = approx;
    res.labeling = labeling;
    res.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Artifacts for one run: detection cloud, level-set zero points, first-stage
/// and corrected error fields, summary, manifest, and the serialized
/// approximant. Deterministic byte-for-byte given the config.
inline RunResult run_experiment_with_artifacts(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunResult res = run_experiment(cfg, /*keep_fields=*/true);
    fs::create_directories(cfg.out);
    const std::string base = cfg.out + "/";
    const int dim = res.labeling->grid.dim;

    csvio::write_points_csv(base + "cloud.csv", res.cloud_points, dim);
    if (res.labeling->levelset) {
        const auto zero = levelset_zero_points(*res.labeling->levelset,
                                               res.labeling->grid.x_max(),
                                               4 * res.labeling->grid.N + 1);
        csvio::write_points_csv(base + "zeroset.csv", zero, dim);
    }
    if (res.first_stage_field)
        csvio::write_error_csv(base + "first_stage_error.csv", *res.first_stage_field);
    if (res.corrected_field)
        csvio::write_error_csv(base + "corrected_error.csv", *res.corrected_field);
    save_approximant(base + "approximant.txt", *res.approximant);

    nlohmann::ordered_json summary;
    summary["first_stage_max"] = res.first_stage_max;
    summary["corrected_max"] = res.corrected_max;
    summary["zone_max"] = {{"boundary", res.zone_max[0]},
                           {"singular", res.zone_max[1]},
                           {"elsewhere", res.zone_max[2]}};
    summary["improvement_ratio"] = res.improvement_ratio;
    summary["residual_sq"] = res.residual_sq;
    summary["regions"] = res.regions;
    {
        std::ofstream f(base + "summary.json", std::ios::binary);
        f << summary.dump(2) << "\n";
    }

    nlohmann::ordered_json manifest;
    manifest["version"] = kVersion;
    for (const auto& k : ExperimentConfig::key_order()) manifest["config"][k] = cfg.get(k);
    manifest["derived"]["h"] = res.labeling->grid.h();
    manifest["derived"]["pad"] = res.labeling->grid.pad;
    manifest["derived"]["columns"] = res.columns;
    manifest["derived"]["zero_columns"] = res.zero_columns;
    manifest["derived"]["rank"] = res.rank;
    manifest["derived"]["regions"] = res.regions;
    manifest["derived"]["cloud_size"] = res.cloud_size;
    manifest["derived"]["bridged_hits"] = res.bridged_hits;
    manifest["derived"]["levelset_max_at_cloud"] = res.levelset_max_at_cloud;
    manifest["results"]["residual_sq"] = res.residual_sq;
    manifest["results"]["first_stage_max"] = res.first_stage_max;
    manifest["results"]["corrected_max"] = res.corrected_max;
    manifest["results"]["zone_boundary"] = res.zone_max[0];
    manifest["results"]["zone_singular"] = res.zone_max[1];
    manifest["results"]["zone_elsewhere"] = res.zone_max[2];
    manifest["results"]["runtime_sec"] = res.runtime_sec;
    {
        std::ofstream f(base + "manifest.json", std::ios::binary);
        f << manifest.dump(2) << "\n";
    }
    return res;
}

struct SweepRow {
    int level = 0;
    int N = 0;
    double h = 0.0;
    double sig_interior_max = 0.0;
    double residual_sq = 0.0;
    double first_stage_max = 0.0;
    double corrected_boundary = 0.0;
    double corrected_singular = 0.0;
    double corrected_elsewhere = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double signature_order = 0.0;   ///< fitted log2 slope of the interior signature max
    double correction_order = 0.0;  ///< fitted slope of the off-singularity corrected error
};

namespace detail {
inline double fitted_order(const std::vector<double>& values) {
    // least-squares slope of -log2(value) against the level index
    std::vector<double> ys;
    for (double v : values) ys.push_back(v > 0.0 ? -std::log2(v) : 52.0);
    const double n = static_cast<double>(ys.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        sx += static_cast<double>(i);
        sy += ys[i];
        sxx += static_cast<double>(i) * static_cast<double>(i);
        sxy += static_cast<double>(i) * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace detail

/// Halve h `levels` times and tabulate the interior signature magnitude,
/// the first-stage residual, and the corrected zone maxima, with fitted
/// log2 orders.
inline SweepResult convergence_sweep(const ExperimentConfig& cfg, int levels) {
    if (levels < 2) throw std::invalid_argument("convergence_sweep: need at least 2 levels");
    SweepResult out;
    std::vector<double> sig, interior;
    for (int level = 0; level < levels; ++level) {
        ExperimentConfig c = cfg;
        c.N = (cfg.N - 1) * (1 << level) + 1;
        RunResult r = run_experiment(c);
        SweepRow row;
        row.level = level;
        row.N = c.N;
        row.h = 1.0 / (c.N - 1);
        row.sig_interior_max = r.sig_interior_max;
        row.residual_sq = r.residual_sq;
        row.first_stage_max = r.first_stage_max;
        row.corrected_boundary = r.zone_max[0];
        row.corrected_singular = r.zone_max[1];
        row.corrected_elsewhere = r.zone_max[2];
        out.rows.push_back(row);
        sig.push_back(row.sig_interior_max);
        interior.push_back(row.corrected_elsewhere);
    }
    out.signature_order = detail::fitted_order(sig);
    out.correction_order = detail::fitted_order(interior);
    return out;
}

inline void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
    auto f = csvio::open_out(path);
    f << "level,N,h,sig_interior_max,residual_sq,first_stage_max,corrected_boundary,"
         "corrected_singular,corrected_elsewhere\n";
    for (const auto& r : sweep.rows) {
        f << r.level << "," << r.N << "," << csvio::fmt(r.h) << ","
          << csvio::fmt(r.sig_interior_max) << "," << csvio::fmt(r.residual_sq) << ","
          << csvio::fmt(r.first_stage_max) << "," << csvio::fmt(r.corrected_boundary) << ","
          << csvio::fmt(r.corrected_singular) << "," << csvio::fmt(r.corrected_elsewhere) << "\n";
    }
}

}  // namespace sigfit
