#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigfit/bspline.hpp"
#include "sigfit/grid.hpp"

namespace sigfit {

/// Piecewise-defined closed-form field: an ordered list of branches, each a
/// smooth evaluator guarded by a membership predicate. The first matching
/// branch wins, so branch ids are 1-based declaration order.
class TestFunction {
public:
    struct Branch {
        std::function<bool(const Point&)> inside;
        std::function<double(const Point&)> value;
    };

    TestFunction(std::string id, int dim, std::vector<Branch> branches)
        : id_(std::move(id)), dim_(dim), branches_(std::move(branches)) {
        if (branches_.empty()) throw std::invalid_argument("TestFunction: no branches");
    }

    const std::string& id() const { return id_; }
    int dim() const { return dim_; }
    int branch_count() const { return static_cast<int>(branches_.size()); }

    int branch_at(const Point& p) const {
        for (std::size_t b = 0; b + 1 < branches_.size(); ++b)
            if (branches_[b].inside(p)) return static_cast<int>(b) + 1;
        return static_cast<int>(branches_.size());  // last branch is the default
    }

    double operator()(const Point& p) const {
        return branches_[static_cast<std::size_t>(branch_at(p) - 1)].value(p);
    }

    double branch_value(int branch, const Point& p) const {
        return branches_[static_cast<std::size_t>(branch - 1)].value(p);
    }

private:
    std::string id_;
    int dim_;
    std::vector<Branch> branches_;
};

namespace testfn {

inline TestFunction example1d() {
    auto base = [](const Point& p) { return 1.0 / (1.0 + (p[0] - 1.0) * (p[0] - 1.0)); };
    return TestFunction(
        "example1d", 1,
        {{[](const Point& p) { return p[0] >= 0.5; }, base},
         {[](const Point&) { return true; },
          [base](const Point& p) { return base(p) + (p[0] + 1.5) * std::cos(4.0 * p[0]); }}});
}

inline double quartic_radius2d(const Point& p) {
    const double a = p[0] + 1.0, b = p[1] + 1.0;
    return a * a * a * a + b * b * b * b;
}

inline TestFunction example2d() {
    return TestFunction(
        "example2d", 2,
        {{[](const Point& p) { return quartic_radius2d(p) >= 10.0; },
          [](const Point& p) {
              return (p[0] + p[1] + 2.0) * std::cos(4.0 * p[0]) + std::sin(4.0 * (p[0] + p[1]));
          }},
         {[](const Point&) { return true; },
          [](const Point& p) { return std::sin(4.0 * (p[0] + p[1])); }}});
}

/// Shipped three-region default: two disjoint curves, strictly monotone in x
/// so every horizontal line crosses each at most once, with jumps bounded
/// away from zero along both curves.
inline double twocurves_lower(double x) { return 0.28 + 0.10 * x + 0.02 * std::sin(3.0 * x); }
inline double twocurves_upper(double x) { return 0.60 + 0.10 * x + 0.025 * std::cos(2.5 * x); }

inline TestFunction twocurves2d() {
    auto core = [](const Point& p) { return std::sin(3.0 * (p[0] + p[1])); };
    return TestFunction(
        "twocurves2d", 2,
        {{[](const Point& p) { return p[1] < twocurves_lower(p[0]); },
          [core](const Point& p) { return core(p) + 2.0 + 0.5 * p[0] - 0.25 * p[1]; }},
         {[](const Point& p) { return p[1] < twocurves_upper(p[0]); }, core},
         {[](const Point&) { return true; },
          [core](const Point& p) { return core(p) - 1.8 - 0.3 * p[0]; }}});
}

inline double quartic_radius3d(const Point& p) {
    const double a = p[0] - 0.5, b = p[1] - 0.5, c = p[2] - 0.5;
    return a * a * a * a + b * b * b * b + c * c * c * c;
}

inline TestFunction example3d() {
    const double r4 = 0.33 * 0.33 * 0.33 * 0.33;
    return TestFunction(
        "example3d", 3,
        {{[r4](const Point& p) { return quartic_radius3d(p) > r4; },
          [](const Point& p) {
              return (std::exp((p[0] + p[1]) / 2.0) - 1.0) * std::sin(2.0 * p[0]);
          }},
         {[](const Point&) { return true; },
          [](const Point& p) {
              const double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
              return std::sin(4.0 * r2) * std::sin(2.0 * (p[0] - p[1]));
          }}});
}

inline TestFunction smooth1d() {
    return TestFunction("smooth1d", 1,
                        {{[](const Point&) { return true; },
                          [](const Point& p) {
                              return std::sin(3.0 * p[0]) + 0.5 * std::cos(7.0 * p[0]) +
                                     0.2 * p[0] * p[0];
                          }}});
}

inline TestFunction smooth2d() {
    return TestFunction("smooth2d", 2,
                        {{[](const Point&) { return true; },
                          [](const Point& p) {
                              return std::sin(3.0 * (p[0] + p[1])) +
                                     0.5 * std::cos(2.0 * p[0] - p[1]);
                          }}});
}

/// Fixed combination of order-4, d=0.25 shifts; lies exactly in that spline
/// space, so a consistent-system run recovers it to solver tolerance.
inline TestFunction splinecase1d() {
    static const double coef[7] = {1.0, -0.5, 2.0, 0.7, -1.2, 0.4, 1.5};
    return TestFunction("splinecase1d", 1,
                        {{[](const Point&) { return true; },
                          [](const Point& p) {
                              double s = 0.0;
                              for (int i = 1; i <= 7; ++i)
                                  s += coef[i - 1] * bspline_value(4, 0.25, p[0] - i * 0.25);
                              return s;
                          }}});
}

inline TestFunction by_id(const std::string& id) {
    if (id == "example1d") return example1d();
    if (id == "example2d") return example2d();
    if (id == "twocurves2d") return twocurves2d();
    if (id == "example3d") return example3d();
    if (id == "smooth1d") return smooth1d();
    if (id == "smooth2d") return smooth2d();
    if (id == "splinecase1d") return splinecase1d();
    throw std::invalid_argument("unknown test function id: " + id);
}

}  // namespace testfn

/// Sample a test function on a padded grid; the padding stays exactly zero.
inline GridFunction sample(const TestFunction& tf, const GridSpec& spec) {
    if (tf.dim() != spec.dim)
        throw std::invalid_argument("sample: test function dimension does not match grid spec");
    return sample_field(spec, [&tf](const Point& p) { return tf(p); });
}

}  // namespace sigfit
