#ifndef NETPRINT_PARAMS_HPP
#define NETPRINT_PARAMS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "netprint/tensor.hpp"

namespace netprint {

enum class InitScheme { UniformGlorot, Zeros, Ones };

/// Deterministic tensor initialization. Glorot fan counts: rank-3 conv kernels
/// (k x Cin x Cout) use k*Cin / k*Cout, matrices use rows/cols, vectors n/n.
Tensor seeded_init(const std::vector<int>& shape, InitScheme scheme, std::uint64_t seed);

/// Named parameter tensors with stable insertion order (serialization and the
/// optimizer both iterate in that order) plus Adam moment state.
class ParamStore {
public:
    ParamStore() = default;

    Tensor& add(const std::string& name, Tensor t);
    bool has(const std::string& name) const { return index_.count(name) != 0; }
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    Tensor& value(std::size_t i) { return values_[i]; }
    const Tensor& value(std::size_t i) const { return values_[i]; }

    long element_count() const;
    bool all_finite() const;

    /// Merge every entry of `other` under `prefix + name`. Order preserved.
    void absorb(const ParamStore& other, const std::string& prefix = "");

    bool bit_identical(const ParamStore& other) const;

    std::uint64_t rng_seed = 0;

    // Adam state, lazily created by adam_step.
    std::vector<Tensor> adam_m, adam_v;
    std::int64_t adam_t = 0;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

using GradMap = std::unordered_map<std::string, Tensor>;

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update over every parameter present in `grads`.
/// Parameters without an entry keep their value (zero gradient).
void adam_step(ParamStore& params, const GradMap& grads, const AdamConfig& cfg);

}  // namespace netprint

#endif  // NETPRINT_PARAMS_HPP
