#include <catch2/catch.hpp>

#include <random>

#include "sigfit/detect.hpp"
#include "sigfit/testfunctions.hpp"

using namespace sigfit;

namespace {

// brute-force curve distance for the quartic circle of example2d
double dist_to_quartic_circle(double x, double y) {
    double best = 1e9;
    for (int t = 0; t <= 4000; ++t) {
        const double th = t * (1.5707963267948966 / 4000);
        const double c = std::cos(th), s = std::sin(th);
        const double r = std::pow(10.0 / (c * c * c * c + s * s * s * s), 0.25);
        best = std::min(best, std::hypot(x - (r * c - 1.0), y - (r * s - 1.0)));
    }
    return best;
}

GridFunction vertical_step_field(int N, double split, double low, double high) {
    GridFunction g((GridSpec(2, N, 2)));
    g.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t) {
        g(i, j) = g.node(i, j)[0] < split ? low : high;
    });
    return g;
}

}  // namespace

TEST_CASE("critical spacing arithmetic") {
    REQUIRE(critical_spacing(1.0, 2.5) == Approx(0.1));
    REQUIRE(critical_spacing(0.0, 3.0) == 0.0);
    REQUIRE(critical_spacing(4.0, 1.0) == Approx(1.0));
    REQUIRE_THROWS_AS(critical_spacing(1.0, 0.0), std::domain_error);
    REQUIRE_THROWS_AS(critical_spacing(1.0, -2.0), std::domain_error);
}

TEST_CASE("interval detection on a single line") {
    const double h = 0.01;
    SECTION("constant line yields nothing") {
        std::vector<double> line(101, 3.5);
        REQUIRE(!detect_interval_1d(line, h).has_value());
    }
    SECTION("a clean step is found with its midpoint") {
        std::vector<double> line(101, 1.0);
        for (std::size_t i = 40; i < line.size(); ++i) line[i] = 2.0;
        auto hit = detect_interval_1d(line, h);
        REQUIRE(hit.has_value());
        REQUIRE(hit->first == 39);
        REQUIRE(hit->second == Approx((39 + 0.5) * h));
    }
    SECTION("example1d at h=0.01 finds the interval containing 0.5") {
        auto tf = testfn::example1d();
        GridFunction g = sample(tf, GridSpec(1, 101, 5));
        std::vector<double> line(static_cast<std::size_t>(g.N()) + 1);
        for (int i = 0; i <= g.N(); ++i) line[static_cast<std::size_t>(i)] = g(i);
        auto hit = detect_interval_1d(line, g.h());
        REQUIRE(hit.has_value());
        REQUIRE(std::abs(hit->second - 0.5) <= g.h() / 2.0 + 1e-12);
    }
    SECTION("too few samples is a contract violation") {
        std::vector<double> line(3, 0.0);
        REQUIRE_THROWS_AS(detect_interval_1d(line, h), std::invalid_argument);
    }
}

TEST_CASE("detection soundness on randomized piecewise lines") {
    std::mt19937 rng(20260808);
    std::uniform_real_distribution<double> pos(0.2, 0.8);
    std::uniform_real_distribution<double> jump(0.5, 3.0);
    std::uniform_real_distribution<double> freq(0.5, 2.0);
    const int n = 100;
    const double h = 1.0 / n;
    int detected = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double s = pos(rng), J = jump(rng), w = freq(rng);
        // sup|f'| <= w + 1 and the jump is J, so h <= h_c holds for all draws
        REQUIRE(h <= critical_spacing(J, w + 1.0));
        std::vector<double> smooth(n + 1), stepped(n + 1);
        for (int i = 0; i <= n; ++i) {
            const double x = i * h;
            smooth[static_cast<std::size_t>(i)] = std::sin(w * x) + 0.5 * x;
            stepped[static_cast<std::size_t>(i)] =
                smooth[static_cast<std::size_t>(i)] + (x >= s ? J : 0.0);
        }
        REQUIRE(!detect_interval_1d(smooth, h).has_value());
        auto hit = detect_interval_1d(stepped, h);
        REQUIRE(hit.has_value());
        REQUIRE(std::abs(hit->second - s) <= h / 2.0);
        ++detected;
    }
    REQUIRE(detected == 100);
}

TEST_CASE("crossing cloud of a smooth field is empty") {
    auto tf = testfn::smooth2d();
    GridFunction g = sample(tf, GridSpec(2, 41, 2));
    auto cloud = collect_crossings(g, {});
    REQUIRE(cloud.hits.empty());
    auto lab = label_regions(g, cloud, 8);
    REQUIRE(lab.R == 1);
}

TEST_CASE("vertical jump line: rows hit, columns stay quiet") {
    GridFunction g = vertical_step_field(41, 0.5, 0.0, 1.0);
    auto cloud = collect_crossings(g, {});
    REQUIRE(!cloud.hits.empty());
    for (const auto& hit : cloud.hits) {
        REQUIRE(hit.axis == 0);  // only lines along x see the jump
        REQUIRE(std::abs(hit.midpoint - 0.4875) < 1e-12);
    }
    // one hit per row
    REQUIRE(cloud.hits.size() == static_cast<std::size_t>(g.N()) + 1);
}

TEST_CASE("example2d cloud points lie near the curve") {
    auto tf = testfn::example2d();
    GridFunction g = sample(tf, GridSpec(2, 41, 2));
    auto cloud = collect_crossings(g, {});
    REQUIRE(cloud.hits.size() > 40);
    for (const auto& hit : cloud.hits) {
        const Point p = cloud.position(hit);
        const double d = dist_to_quartic_circle(p[0], p[1]);
        if (!hit.bridged) REQUIRE(d <= g.h() / 2.0 + 1e-9);
        else REQUIRE(d <= 1.5 * g.h());
    }
}

TEST_CASE("example2d labeling: two regions matching the predicate") {
    auto tf = testfn::example2d();
    GridFunction g = sample(tf, GridSpec(2, 41, 2));
    auto cloud = collect_crossings(g, {});
    auto lab = label_regions(g, cloud, 8);
    REQUIRE(lab.R == 2);
    long long agree = 0, total = 0;
    for (int i = 0; i <= g.N(); ++i)
        for (int j = 0; j <= g.N(); ++j) {
            const Point p = g.node(i, j);
            if (dist_to_quartic_circle(p[0], p[1]) <= g.h()) continue;
            ++total;
            // branch 1 (outside) maps to label 1, branch 2 to label 2 here
            if (lab.label_at_node(i, j) == tf.branch_at(p)) ++agree;
        }
    REQUIRE(static_cast<double>(agree) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("three bands flood-fill into three regions with the middle first") {
    GridSpec spec(2, 41, 2);
    GridFunction g(spec);
    g.for_each_interior([&](std::int64_t i, std::int64_t j, std::int64_t) {
        const double x = g.node(i, j)[0];
        g(i, j) = x < 0.33 ? 0.0 : (x < 0.66 ? 2.0 : 4.5);
    });
    DetectionParams det;
    det.max_hits_per_line = 2;
    auto cloud = collect_crossings(g, det);
    auto lab = label_regions(g, cloud, 8);
    REQUIRE(lab.R == 3);
    // the middle band is the unique region adjacent to both others
    REQUIRE(lab.label_at_node(20, 20) == 1);
    REQUIRE(lab.label_at_node(2, 20) != 1);
    REQUIRE(lab.label_at_node(40, 20) != 1);
}

TEST_CASE("level-set fit: straight line jump") {
    GridFunction g = vertical_step_field(41, 0.5, -1.0, 1.0);
    auto cloud = collect_crossings(g, {});
    auto lab = label_regions(g, cloud, 8);
    REQUIRE(lab.R == 2);
    auto D = fit_levelset(cloud, lab, 9, 0.25, 1.0);
    // zero crossing of D along horizontal probes stays within h of the cut
    for (int probe = 0; probe <= 100; ++probe) {
        const double y = probe / 100.0;
        double lo = 0.3, hi = 0.7;
        const double dlo = D.eval({lo, y, 0.0});
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((D.eval({mid, y, 0.0}) >= 0.0) == (dlo >= 0.0)) lo = mid;
            else hi = mid;
        }
        REQUIRE(std::abs(0.5 * (lo + hi) - 0.4875) <= g.h());
    }
    REQUIRE_THROWS_AS(fit_levelset(cloud, lab, 3, 0.25, 1.0), std::invalid_argument);
}

TEST_CASE("level-set fit on example2d: curve within 2h, cloud residual small") {
    auto tf = testfn::example2d();
    GridFunction g = sample(tf, GridSpec(2, 41, 2));
    auto cloud = collect_crossings(g, {});
    auto lab = label_regions(g, cloud, 8);
    auto D = fit_levelset(cloud, lab, 9, 0.25, 1.0);
    REQUIRE(D.max_abs_at_cloud <= 2.0 * g.h());

    const auto zero = levelset_zero_points(D, g.spec().x_max(), 401);
    REQUIRE(zero.size() > 100);
    double worst = 0.0;
    for (const auto& z : zero) worst = std::max(worst, dist_to_quartic_circle(z[0], z[1]));
    REQUIRE(worst <= 2.0 * g.h());
    // and the curve is covered by the zero set
    for (int t = 0; t <= 1000; ++t) {
        const double th = t * (1.5707963267948966 / 1000);
        const double c = std::cos(th), s = std::sin(th);
        const double r = std::pow(10.0 / (c * c * c * c + s * s * s * s), 0.25);
        const double cx = r * c - 1.0, cy = r * s - 1.0;
        if (cx < 0.0 || cy < 0.0 || cx > g.spec().x_max() || cy > g.spec().x_max()) continue;
        double best = 1e9;
        for (const auto& z : zero) best = std::min(best, std::hypot(cx - z[0], cy - z[1]));
        REQUIRE(best <= 2.0 * g.h());
    }
}

TEST_CASE("level-set weighting drives the cloud residual down") {
    GridFunction g = vertical_step_field(33, 0.47, 0.0, 2.0);
    auto cloud = collect_crossings(g, {});
    auto lab = label_regions(g, cloud, 8);
    double prev = std::numeric_limits<double>::max();
    for (double w : {1.0, 10.0, 100.0}) {
        auto D = fit_levelset(cloud, lab, 9, 0.25, w);
        REQUIRE(D.max_abs_at_cloud <= prev * (1.0 + 1e-9));
        prev = D.max_abs_at_cloud;
    }
}

TEST_CASE("classification conventions") {
    auto tf = testfn::example2d();
    GridFunction g = sample(tf, GridSpec(2, 41, 2));
    auto cloud = collect_crossings(g, {});
    auto lab = label_regions(g, cloud, 8);
    lab.levelset = std::make_shared<LevelSetSpline>(fit_levelset(cloud, lab, 9, 0.25, 1.0));

    SECTION("the origin is inside the curve, region 2") {
        REQUIRE(lab.classify({0.0, 0.0, 0.0}) == 2);
        REQUIRE(lab.classify({1.0, 1.0, 0.0}) == 1);
    }
    SECTION("D >= 0 everywhere classifies as region 1, including the zero set") {
        RegionLabeling flat = lab;
        auto D = std::make_shared<LevelSetSpline>(*lab.levelset);
        D->coef.setZero();  // identically zero; >= holds everywhere
        flat.levelset = D;
        REQUIRE(flat.classify({0.3, 0.7, 0.0}) == 1);
        REQUIRE(flat.classify({0.0, 0.0, 0.0}) == 1);
    }
    SECTION("classify agrees with the node labels almost everywhere") {
        long long agree = 0, total = 0;
        for (int i = 0; i <= g.N(); ++i)
            for (int j = 0; j <= g.N(); ++j) {
                ++total;
                if (lab.classify(g.node(i, j)) == lab.label_at_node(i, j)) ++agree;
            }
        REQUIRE(static_cast<double>(agree) / static_cast<double>(total) >= 0.99);
    }
}

TEST_CASE("closed-surface labeling on the 3-D ball") {
    auto tf = testfn::example3d();
    GridFunction g = sample(tf, GridSpec(3, 25, 4));
    DetectionParams det;
    det.max_hits_per_line = 2;
    auto cloud = collect_crossings(g, det);
    REQUIRE(cloud.hits.size() > 500);
    auto lab = label_closed_surface(g, cloud, 11, 0.2, 1.0);
    REQUIRE(lab.R == 2);
    REQUIRE(lab.levelset != nullptr);
    long long agree = 0, total = 0;
    for (int i = 0; i <= g.N(); ++i)
        for (int j = 0; j <= g.N(); ++j)
            for (int k = 0; k <= g.N(); ++k) {
                const Point p = g.node(i, j, k);
                const double rx = std::abs(p[0] - 0.5), ry = std::abs(p[1] - 0.5),
                             rz = std::abs(p[2] - 0.5);
                const double q = std::pow(rx * rx * rx * rx + ry * ry * ry * ry +
                                              rz * rz * rz * rz,
                                          0.25);
                if (std::abs(q - 0.33) <= g.h()) continue;
                ++total;
                if (lab.label_at_node(i, j, k) == tf.branch_at(p)) ++agree;
            }
    REQUIRE(static_cast<double>(agree) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("1-D labeling carries breakpoints and segment labels") {
    auto tf = testfn::example1d();
    GridFunction g = sample(tf, GridSpec(1, 101, 5));
    auto cloud = detect_crossings_1d(g, {});
    REQUIRE(cloud.hits.size() == 1);
    auto lab = label_regions(g, cloud, 8);
    attach_breakpoints_1d(lab, cloud);
    REQUIRE(lab.R == 2);
    REQUIRE(lab.breakpoints.size() == 1);
    REQUIRE(std::abs(lab.breakpoints[0] - 0.5) <= g.h() / 2.0 + 1e-12);
    const int left = lab.classify({0.2, 0.0, 0.0});
    const int right = lab.classify({0.8, 0.0, 0.0});
    REQUIRE(left != right);
    REQUIRE(lab.classify({0.2, 0.0, 0.0}) == lab.label_at_node(20));
    REQUIRE(lab.classify({0.8, 0.0, 0.0}) == lab.label_at_node(80));
}
