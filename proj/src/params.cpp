#include "netprint/params.hpp"

#include <cmath>
#include <cstring>

#include "netprint/error.hpp"
#include "netprint/rng.hpp"

namespace netprint {

Tensor seeded_init(const std::vector<int>& shape, InitScheme scheme, std::uint64_t seed) {
    Tensor t(shape);
    switch (scheme) {
        case InitScheme::Zeros:
            return t;
        case InitScheme::Ones:
            for (auto& x : t.v) x = 1.0;
            return t;
        case InitScheme::UniformGlorot: {
            double fan_in = 1.0, fan_out = 1.0;
            if (shape.size() == 3) {
                fan_in = double(shape[0]) * shape[1];
                fan_out = double(shape[0]) * shape[2];
            } else if (shape.size() == 2) {
                fan_in = shape[0];
                fan_out = shape[1];
            } else if (shape.size() == 1) {
                fan_in = fan_out = shape[0];
            }
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            Rng rng(seed);
            for (auto& x : t.v) x = rng.uniform(-bound, bound);
            return t;
        }
    }
    NP_REQUIRE(false, "unknown init scheme");
    return t;
}

Tensor& ParamStore::add(const std::string& name, Tensor t) {
    NP_REQUIRE(!has(name), "duplicate parameter name: " + name);
    index_.emplace(name, names_.size());
    names_.push_back(name);
    values_.push_back(std::move(t));
    return values_.back();
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    NP_REQUIRE(it != index_.end(), "unknown parameter: " + name);
    return values_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    NP_REQUIRE(it != index_.end(), "unknown parameter: " + name);
    return values_[it->second];
}

long ParamStore::element_count() const {
    long n = 0;
    for (const auto& t : values_) n += t.size();
    return n;
}

bool ParamStore::all_finite() const {
    for (const auto& t : values_)
        if (!t.all_finite()) return false;
    return true;
}

void ParamStore::absorb(const ParamStore& other, const std::string& prefix) {
    for (std::size_t i = 0; i < other.size(); ++i) add(prefix + other.names()[i], other.value(i));
}

bool ParamStore::bit_identical(const ParamStore& other) const {
    if (names_ != other.names_) return false;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i].shape != other.values_[i].shape) return false;
        if (values_[i].v.size() != other.values_[i].v.size()) return false;
        for (std::size_t j = 0; j < values_[i].v.size(); ++j) {
            // Bitwise, not value, comparison: distinguishes -0.0 and NaN payloads.
            if (std::memcmp(&values_[i].v[j], &other.values_[i].v[j], sizeof(double)) != 0)
                return false;
        }
    }
    return true;
}

void adam_step(ParamStore& params, const GradMap& grads, const AdamConfig& cfg) {
    if (params.adam_m.size() != params.size()) {
        params.adam_m.clear();
        params.adam_v.clear();
        for (std::size_t i = 0; i < params.size(); ++i) {
            params.adam_m.emplace_back(Tensor::zeros(params.value(i).shape));
            params.adam_v.emplace_back(Tensor::zeros(params.value(i).shape));
        }
    }
    params.adam_t += 1;
    const double t = static_cast<double>(params.adam_t);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto it = grads.find(params.names()[i]);
        if (it == grads.end()) continue;
        const Tensor& g = it->second;
        Tensor& p = params.value(i);
        NP_REQUIRE(g.shape == p.shape, "gradient shape mismatch for " + params.names()[i]);
        Tensor& m = params.adam_m[i];
        Tensor& v = params.adam_v[i];
        for (int j = 0; j < p.size(); ++j) {
            m.v[j] = cfg.beta1 * m.v[j] + (1.0 - cfg.beta1) * g.v[j];
            v.v[j] = cfg.beta2 * v.v[j] + (1.0 - cfg.beta2) * g.v[j] * g.v[j];
            const double mhat = m.v[j] / bc1;
            const double vhat = v.v[j] / bc2;
            p.v[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace netprint
