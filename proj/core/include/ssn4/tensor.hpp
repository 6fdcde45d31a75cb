#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ssn4/errors.hpp"

namespace ssn4 {

// Dense row-major tensor of 64-bit floats, rank 1 or 2 in practice.
// Construction rejects non-finite entries and non-positive dimensions.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::vector<int> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        std::size_t n = 1;
        for (int d : shape_) {
            if (d <= 0) throw ShapeError("tensor dimension must be positive");
            n *= static_cast<std::size_t>(d);
        }
        if (n != values_.size())
            throw ShapeError("tensor value count does not match shape");
        for (double v : values_)
            if (!std::isfinite(v)) throw NumericError("non-finite tensor entry");
    }

    static Tensor zeros(std::vector<int> shape) {
        std::size_t n = 1;
        for (int d : shape) {
            if (d <= 0) throw ShapeError("tensor dimension must be positive");
            n *= static_cast<std::size_t>(d);
        }
        Tensor t;
        t.shape_ = std::move(shape);
        t.values_.assign(n, 0.0);
        return t;
    }

    static Tensor full(std::vector<int> shape, double value) {
        if (!std::isfinite(value)) throw NumericError("non-finite tensor entry");
        Tensor t = zeros(std::move(shape));
        t.fill(value);
        return t;
    }

    static Tensor scalar(double value) { return Tensor({1}, {value}); }

    static Tensor vector(std::vector<double> values) {
        int n = static_cast<int>(values.size());
        return Tensor({n}, std::move(values));
    }

    static Tensor matrix(int rows, int cols, std::vector<double> values) {
        return Tensor({rows, cols}, std::move(values));
    }

    int rank() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
    std::size_t size() const { return values_.size(); }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    // Rank-2 element access.
    double& at(int i, int j) {
        return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(shape_[1]) +
                       static_cast<std::size_t>(j)];
    }
    double at(int i, int j) const {
        return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(shape_[1]) +
                       static_cast<std::size_t>(j)];
    }

    void fill(double v) {
        for (double& x : values_) x = v;
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    double item() const {
        if (values_.size() != 1) throw ShapeError("item() on non-scalar tensor");
        return values_[0];
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + ")";
    }

private:
    std::vector<int> shape_;
    std::vector<double> values_;
};

}  // namespace ssn4
