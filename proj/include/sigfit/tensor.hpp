#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sigfit {

/// Dense row-major tensor of doubles, rank 1..3. Trailing extents are 1,
/// so rank-1/2 data uses the same index arithmetic as rank-3.
class Tensor {
public:
    Tensor() = default;

    Tensor(int dim, std::array<std::int64_t, 3> extents, double fill = 0.0)
        : dim_(dim), ext_(extents) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("Tensor: dim must be 1, 2 or 3");
        for (int a = dim; a < 3; ++a) ext_[a] = 1;
        for (int a = 0; a < 3; ++a)
            if (ext_[a] < 1) throw std::invalid_argument("Tensor: extents must be positive");
        data_.assign(static_cast<std::size_t>(ext_[0] * ext_[1] * ext_[2]), fill);
    }

    int dim() const { return dim_; }
    std::int64_t extent(int axis) const { return ext_[axis]; }
    const std::array<std::int64_t, 3>& extents() const { return ext_; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    std::int64_t flat(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        assert(i >= 0 && i < ext_[0] && j >= 0 && j < ext_[1] && k >= 0 && k < ext_[2]);
        return (i * ext_[1] + j) * ext_[2] + k;
    }

    double& operator()(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) {
        return data_[static_cast<std::size_t>(flat(i, j, k))];
    }
    double operator()(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        return data_[static_cast<std::size_t>(flat(i, j, k))];
    }

    double& at_flat(std::int64_t f) { return data_[static_cast<std::size_t>(f)]; }
    double at_flat(std::int64_t f) const { return data_[static_cast<std::size_t>(f)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, v < 0 ? -v : v);
        return m;
    }

private:
    int dim_ = 1;
    std::array<std::int64_t, 3> ext_{1, 1, 1};
    std::vector<double> data_;
};

/// Integer-labeled companion tensor (region ids, zone tags).
class LabelTensor {
public:
    LabelTensor() = default;
    LabelTensor(int dim, std::array<std::int64_t, 3> extents, int fill = 0)
        : dim_(dim), ext_(extents) {
        for (int a = dim; a < 3; ++a) ext_[a] = 1;
        data_.assign(static_cast<std::size_t>(ext_[0] * ext_[1] * ext_[2]), fill);
    }

    int dim() const { return dim_; }
    std::int64_t extent(int axis) const { return ext_[axis]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    std::int64_t flat(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        return (i * ext_[1] + j) * ext_[2] + k;
    }
    int& operator()(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) {
        return data_[static_cast<std::size_t>(flat(i, j, k))];
    }
    int operator()(std::int64_t i, std::int64_t j = 0, std::int64_t k = 0) const {
        return data_[static_cast<std::size_t>(flat(i, j, k))];
    }
    int& at_flat(std::int64_t f) { return data_[static_cast<std::size_t>(f)]; }
    int at_flat(std::int64_t f) const { return data_[static_cast<std::size_t>(f)]; }

    std::vector<int>& data() { return data_; }
    const std::vector<int>& data() const { return data_; }

private:
    int dim_ = 1;
    std::array<std::int64_t, 3> ext_{1, 1, 1};
    std::vector<int> data_;
};

}  // namespace sigfit
