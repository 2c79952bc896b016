#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sigfit/experiment.hpp"
#include "sigfit/serialize.hpp"

namespace {

sigfit::ExperimentConfig build_config(const std::string& preset, const std::string& config_path,
                                      bool reduced, const std::vector<std::string>& overrides,
                                      const std::string& out, int threads, std::uint64_t seed) {
    sigfit::ExperimentConfig cfg;
    if (!preset.empty()) {
        std::string name = preset;
        if (name == "paper-3d" && reduced) name = "paper-3d-reduced";
        cfg = sigfit::ExperimentConfig::preset(name);
    }
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open config: " + config_path);
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = sigfit::ExperimentConfig::parse(ss.str());
    }
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects key=value, got: " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out.empty()) cfg.out = out;
    if (threads > 0) cfg.threads = threads;
    cfg.seed = seed;
    return cfg;
}

void print_summary(const sigfit::RunResult& r) {
    std::printf("regions               %d\n", r.regions);
    std::printf("cloud points          %zu (%zu bridged)\n", r.cloud_size, r.bridged_hits);
    std::printf("columns               %lld (%lld identically zero)\n",
                static_cast<long long>(r.columns), static_cast<long long>(r.zero_columns));
    std::printf("rank                  %d\n", r.rank);
    std::printf("signature residual^2  %.6e\n", r.residual_sq);
    std::printf("first-stage max err   %.6e\n", r.first_stage_max);
    if (r.corrected_max > 0.0) {
        std::printf("corrected max err     %.6e (improvement %.3gx)\n", r.corrected_max,
                    r.improvement_ratio);
        std::printf("zone max              boundary %.3e  singular %.3e  elsewhere %.3e\n",
                    r.zone_max[0], r.zone_max[1], r.zone_max[2]);
    }
    std::printf("runtime               %.2f s\n", r.runtime_sec);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sigfit - piecewise-smooth grid approximation by signature matching"};
    app.require_subcommand(1);

    std::string preset, config_path, out;
    std::vector<std::string> overrides;
    bool reduced = false;
    int threads = 0;
    std::uint64_t seed = 0;
    int levels = 3;
    std::string approx_path, function_id, report_correction = "spline:4";
    int fine = 4;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--preset", preset, "preset: smoke, paper-1d, paper-2d, paper-2curves, paper-3d");
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--set", overrides, "override a config key, key=value (repeatable)");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--threads", threads, "worker thread cap");
        cmd->add_option("--seed", seed, "reserved; recorded in the manifest");
        cmd->add_flag("--reduced", reduced, "use the reduced 3-D settings (N=33, degree 6)");
    };

    CLI::App* run = app.add_subcommand("run", "run one experiment and write artifacts");
    add_common(run);
    CLI::App* sweep = app.add_subcommand("sweep", "convergence sweep over h, h/2, ...");
    add_common(sweep);
    sweep->add_option("--levels", levels, "number of grid levels (>= 2)");
    CLI::App* detect = app.add_subcommand("detect", "detection and level-set artifacts only");
    add_common(detect);
    CLI::App* report = app.add_subcommand("report", "error report for a saved approximant");
    report->add_option("--approx", approx_path, "approximant file")->required();
    report->add_option("--function", function_id, "test function id")->required();
    report->add_option("--correction", report_correction, "correction spec, e.g. spline:6");
    report->add_option("--fine", fine, "fine-grid factor");
    report->add_option("--out", out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto cfg = build_config(preset, config_path, reduced, overrides, out, threads, seed);
            auto res = sigfit::run_experiment_with_artifacts(cfg);
            print_summary(res);
            return 0;
        }
        if (sweep->parsed()) {
            auto cfg = build_config(preset, config_path, reduced, overrides, out, threads, seed);
            auto sw = sigfit::convergence_sweep(cfg, levels);
            std::filesystem::create_directories(cfg.out);
            sigfit::write_sweep_csv(cfg.out + "/sweep.csv", sw);
            std::printf("level        N            h   sig_int_max   first_stage     elsewhere\n");
            for (const auto& r : sw.rows)
                std::printf("%5d %8d %12.6g %13.4e %13.4e %13.4e\n", r.level, r.N, r.h,
                            r.sig_interior_max, r.first_stage_max, r.corrected_elsewhere);
            std::printf("fitted signature order  %.2f\n", sw.signature_order);
            std::printf("fitted correction order %.2f\n", sw.correction_order);
            return 0;
        }
        if (detect->parsed()) {
            auto cfg = build_config(preset, config_path, reduced, overrides, out, threads, seed);
            sigfit::max_threads() = cfg.threads;
            auto tf = sigfit::testfn::by_id(cfg.function);
            const auto sigspec = sigfit::parse_signature_spec(cfg.signature);
            const int pad = sigfit::pad_width_for(sigspec.stencil_reach(),
                                                  cfg.pad > 0 ? cfg.pad : 0);
            auto g = sigfit::sample(tf, sigfit::GridSpec(tf.dim(), cfg.N, pad));
            sigfit::DetectionParams det;
            det.tau = cfg.tau;
            det.max_hits_per_line = cfg.max_hits;
            det.bridge_gaps = cfg.bridge != 0;
            auto cloud = g.dim() == 1 ? sigfit::detect_crossings_1d(g, det)
                                      : sigfit::collect_crossings(g, det);
            auto labeling = sigfit::label_regions(g, cloud, cfg.max_regions);
            std::filesystem::create_directories(cfg.out);
            sigfit::csvio::write_points_csv(cfg.out + "/cloud.csv", cloud.points(), g.dim());
            if (g.dim() >= 2 && labeling.R >= 2 && !cloud.hits.empty()) {
                auto D = sigfit::fit_levelset(cloud, labeling, cfg.mq, cfg.dd, cfg.q0_weight);
                const auto zero =
                    sigfit::levelset_zero_points(D, labeling.grid.x_max(), 4 * cfg.N + 1);
                sigfit::csvio::write_points_csv(cfg.out + "/zeroset.csv", zero, g.dim());
                std::printf("levelset |D| at cloud  %.3e\n", D.max_abs_at_cloud);
            }
            std::printf("regions %d, cloud points %zu\n", labeling.R, cloud.hits.size());
            return 0;
        }
        if (report->parsed()) {
            auto s = std::make_shared<sigfit::PiecewiseApproximant>(
                sigfit::load_approximant(approx_path));
            auto tf = sigfit::testfn::by_id(function_id);
            const auto& gs = s->labeling->grid;
            auto g = sigfit::sample(tf, gs);
            auto fa = sigfit::corrected(g, s, sigfit::parse_correction(report_correction),
                                        sigfit::EvalMode::exact, &tf);
            std::vector<sigfit::Point> singular_ref;
            if (gs.dim == 1)
                for (double b : s->labeling->breakpoints) singular_ref.push_back({b, 0.0, 0.0});
            else if (s->labeling->levelset)
                singular_ref = sigfit::levelset_zero_points(*s->labeling->levelset, gs.x_max(),
                                                            2 * gs.N + 1);
            auto field = sigfit::error_report(tf, fa, fine, s->basis.order() * gs.h(),
                                              singular_ref);
            if (!out.empty()) {
                std::filesystem::create_directories(out);
                sigfit::csvio::write_error_csv(out + "/corrected_error.csv", field);
            }
            std::printf("corrected max %.6e  boundary %.3e singular %.3e elsewhere %.3e\n",
                        field.max_abs, field.zone_max[0], field.zone_max[1], field.zone_max[2]);
            return 0;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
