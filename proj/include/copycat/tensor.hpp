#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace copycat {

// Dense n-dimensional array of doubles, row-major. The shape/data pair is the
// currency of every numeric module; invariant: data.size() == product(shape).
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> dims) : shape(std::move(dims)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0);
    }

    static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }

    static long long numel_of(const std::vector<int>& dims) {
        if (dims.empty()) return 0;
        long long n = 1;
        for (int d : dims) {
            if (d <= 0) throw std::invalid_argument("tensor dims must be positive, got " + std::to_string(d));
            n *= d;
        }
        return n;
    }

    long long numel() const { return static_cast<long long>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor& o) const { return shape == o.shape && data == o.data; }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

}  // namespace copycat
