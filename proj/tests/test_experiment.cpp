#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sigfit/csv.hpp"
#include "sigfit/experiment.hpp"

using namespace sigfit;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config round-trips through its canonical text form") {
    ExperimentConfig cfg = ExperimentConfig::preset("paper-2d");
    cfg.tau = 0.125;
    cfg.out = "some/dir";
    const std::string text = cfg.emit();
    ExperimentConfig back = ExperimentConfig::parse(text);
    REQUIRE(back.emit() == text);

    // comments and blank lines are tolerated; unknown keys are not
    ExperimentConfig c2 = ExperimentConfig::parse("# comment\n\nN=51\nbasis=bspline:4:0.25\n");
    REQUIRE(c2.N == 51);
    REQUIRE(c2.basis == "bspline:4:0.25");
    REQUIRE_THROWS_AS(ExperimentConfig::parse("nope=1\n"), std::invalid_argument);
}

TEST_CASE("spec parsers reject malformed input") {
    REQUIRE(parse_signature_spec("forward:5").kind == SignatureKind::forward_diff_k);
    REQUIRE(parse_signature_spec("biharmonic").stencil_reach() == 2);
    REQUIRE(parse_signature_spec("axis:4").order == 4);
    REQUIRE_THROWS_AS(parse_signature_spec("fourier:2"), std::invalid_argument);
    REQUIRE(parse_basis("chebyshev:8", 3).size() == 729);
    REQUIRE(parse_basis("bspline:6:0.1", 2).size() == 225);
    REQUIRE_THROWS_AS(parse_basis("legendre:3", 2), std::invalid_argument);
    REQUIRE(parse_correction("spline:6").spline_order == 6);
    REQUIRE(parse_correction("quasi:3").degree == 3);
    REQUIRE_THROWS_AS(parse_correction("sinc:2"), std::invalid_argument);
}

TEST_CASE("smoke preset: exact-space case corrected to roundoff, quickly") {
    auto cfg = ExperimentConfig::preset("smoke");
    auto res = run_experiment(cfg);
    REQUIRE(res.regions == 1);
    REQUIRE(res.corrected_max <= 1e-8);
    REQUIRE(res.runtime_sec < 5.0);
}

TEST_CASE("zero data sweeps to an all-zero table") {
    ExperimentConfig cfg;
    cfg.function = "csv:test_zero_grid.csv";
    {
        GridFunction z(GridSpec(1, 41, 3));
        csvio::write_grid_csv("test_zero_grid.csv", z);
    }
    cfg.signature = "forward:3";
    cfg.basis = "bspline:4:0.25";
    auto res = run_experiment(cfg);
    REQUIRE(res.sig_interior_max == 0.0);
    REQUIRE(res.first_stage_max < 1e-12);
    std::remove("test_zero_grid.csv");
}

TEST_CASE("artifacts are deterministic byte for byte") {
    namespace fs = std::filesystem;
    auto cfg = ExperimentConfig::preset("smoke");
    cfg.function = "example1d";
    cfg.N = 41;
    cfg.signature = "forward:4";
    cfg.basis = "bspline:4:0.25";
    cfg.out = "test_det_run1";
    run_experiment_with_artifacts(cfg);
    cfg.out = "test_det_run2";
    run_experiment_with_artifacts(cfg);
    for (const char* name : {"cloud.csv", "first_stage_error.csv", "corrected_error.csv",
                             "approximant.txt", "summary.json"}) {
        REQUIRE(slurp(std::string("test_det_run1/") + name) ==
                slurp(std::string("test_det_run2/") + name));
    }
    fs::remove_all("test_det_run1");
    fs::remove_all("test_det_run2");
}

TEST_CASE("manifest records every config key") {
    namespace fs = std::filesystem;
    auto cfg = ExperimentConfig::preset("smoke");
    cfg.out = "test_manifest_run";
    run_experiment_with_artifacts(cfg);
    const auto manifest = nlohmann::json::parse(slurp("test_manifest_run/manifest.json"));
    for (const auto& key : ExperimentConfig::key_order()) {
        INFO(key);
        REQUIRE(manifest["config"].contains(key));
        REQUIRE(manifest["config"][key] == cfg.get(key));
    }
    REQUIRE(manifest["results"].contains("corrected_max"));
    REQUIRE(manifest["derived"].contains("rank"));
    fs::remove_all("test_manifest_run");
}

TEST_CASE("convergence sweep fits the expected orders in the stable regime") {
    ExperimentConfig cfg;
    cfg.function = "smooth1d";
    cfg.N = 65;
    cfg.signature = "forward:3";
    cfg.basis = "bspline:4:0.125";
    cfg.correction = "spline:4";
    cfg.fine_factor = 6;
    auto sw = convergence_sweep(cfg, 3);
    REQUIRE(sw.rows.size() == 3);
    REQUIRE(sw.signature_order >= 3.0 - 0.5);
    REQUIRE(sw.correction_order >= 3.5);
    REQUIRE_THROWS_AS(convergence_sweep(cfg, 1), std::invalid_argument);
}

TEST_CASE("error field csv carries coordinates, error and zone") {
    auto cfg = ExperimentConfig::preset("smoke");
    cfg.out = "test_csv_run";
    run_experiment_with_artifacts(cfg);
    std::ifstream f("test_csv_run/corrected_error.csv");
    std::string header;
    std::getline(f, header);
    REQUIRE(header == "x,error,zone");
    std::string line;
    int rows = 0;
    bool sawzone = false;
    while (std::getline(f, line)) {
        ++rows;
        if (line.find("boundary") != std::string::npos ||
            line.find("singular") != std::string::npos ||
            line.find("elsewhere") != std::string::npos)
            sawzone = true;
    }
    REQUIRE(rows == 4 * 21 + 1);
    REQUIRE(sawzone);
    std::filesystem::remove_all("test_csv_run");
}

TEST_CASE("signature csv export has the promised shape") {
    auto tf = testfn::example1d();
    GridFunction g = sample(tf, GridSpec(1, 21, 3));
    auto sig = signature_1d(g, 3);
    csvio::write_signature_csv("test_sig.csv", sig);
    std::ifstream f("test_sig.csv");
    std::string l1, l2;
    std::getline(f, l1);
    std::getline(f, l2);
    REQUIRE(l1 == "dim,N,pad,kind,order,components");
    REQUIRE(l2 == "1,21,3,forward,3,1");
    int rows = 0;
    std::string line;
    while (std::getline(f, line)) ++rows;
    REQUIRE(rows == sig.total_size());
    std::remove("test_sig.csv");
}
