#ifndef NETPRINT_TENSOR_HPP
#define NETPRINT_TENSOR_HPP

#include <cmath>
#include <string>
#include <vector>

#include "netprint/error.hpp"

namespace netprint {

/// Dense row-major tensor of 64-bit reals, rank 0..3. This is the only numeric
/// container the networks use; shapes are fixed per graph, no broadcasting.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape_in) : shape(std::move(shape_in)) {
        v.assign(static_cast<std::size_t>(count(shape)), 0.0);
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    static Tensor scalar(double x) {
        Tensor t{std::vector<int>{}};
        t.v.assign(1, x);
        return t;
    }

    static Tensor from_values(std::vector<int> shape, std::vector<double> values) {
        Tensor t;
        t.shape = std::move(shape);
        NP_REQUIRE(static_cast<std::size_t>(count(t.shape)) == values.size(),
                   "value count does not match shape");
        t.v = std::move(values);
        return t;
    }

    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(v.size()); }
    bool is_scalar() const { return v.size() == 1 && shape.empty(); }

    double& operator()(int i) { return v[static_cast<std::size_t>(i)]; }
    double operator()(int i) const { return v[static_cast<std::size_t>(i)]; }

    double& operator()(int i, int j) { return v[static_cast<std::size_t>(i * dim(1) + j)]; }
    double operator()(int i, int j) const { return v[static_cast<std::size_t>(i * dim(1) + j)]; }

    double& operator()(int i, int j, int k) {
        return v[static_cast<std::size_t>((i * dim(1) + j) * dim(2) + k)];
    }
    double operator()(int i, int j, int k) const {
        return v[static_cast<std::size_t>((i * dim(1) + j) * dim(2) + k)];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }

    static long count(const std::vector<int>& shape) {
        long n = 1;
        for (int d : shape) {
            NP_REQUIRE(d >= 0, "negative dimension");
            n *= d;
        }
        return n;
    }

    std::vector<int> shape;
    std::vector<double> v;
};

}  // namespace netprint

#endif  // NETPRINT_TENSOR_HPP
