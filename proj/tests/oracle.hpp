#ifndef NETPRINT_TESTS_ORACLE_HPP
#define NETPRINT_TESTS_ORACLE_HPP

// Straight-line reference implementations used to cross-check the library.
// Everything here is deliberately naive (plain loops, no tape, no shared code
// with src/) so a defect in the production path cannot hide in its oracle.

#include <cmath>
#include <vector>

#include "netprint/rng.hpp"
#include "netprint/tensor.hpp"

namespace oracle {

using netprint::Rng;
using netprint::Tensor;

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (auto& x : t.v) x = rng.uniform(lo, hi);
    return t;
}

inline Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b) {
    const int L = x.dim(0), cin = x.dim(1), k = w.dim(0), cout = w.dim(2);
    const int off = k / 2;
    Tensor out({L, cout});
    for (int p = 0; p < L; ++p)
        for (int co = 0; co < cout; ++co) {
            double acc = b(co);
            for (int dk = 0; dk < k; ++dk)
                for (int ci = 0; ci < cin; ++ci) {
                    const int r = p + dk - off;
                    if (r < 0 || r >= L) continue;
                    acc += x(r, ci) * w(dk, ci, co);
                }
            out(p, co) = acc;
        }
    return out;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (int i = 0; i < out.size(); ++i) out.v[std::size_t(i)] *= b.v[std::size_t(i)];
    return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (int i = 0; i < out.size(); ++i) out.v[std::size_t(i)] += b.v[std::size_t(i)];
    return out;
}

inline Tensor map_sigmoid(const Tensor& a) {
    Tensor out = a;
    for (auto& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
    return out;
}

inline Tensor map_tanh(const Tensor& a) {
    Tensor out = a;
    for (auto& x : out.v) x = std::tanh(x);
    return out;
}

inline Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
    const int n = x.dim(0), m = w.dim(1);
    Tensor out({m});
    for (int j = 0; j < m; ++j) {
        double acc = b(j);
        for (int i = 0; i < n; ++i) acc += x(i) * w(i, j);
        out(j) = acc;
    }
    return out;
}

inline Tensor mean_pool(const Tensor& x) {
    const int L = x.dim(0), c = x.dim(1);
    Tensor out({c});
    for (int j = 0; j < c; ++j) {
        double acc = 0.0;
        for (int p = 0; p < L; ++p) acc += x(p, j);
        out(j) = acc / L;
    }
    return out;
}

inline double mse(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = a.v[std::size_t(i)] - b.v[std::size_t(i)];
        acc += d * d;
    }
    return acc / a.size();
}

struct CellWeights {
    Tensor wxi, whi, wci, bi;
    Tensor wxf, whf, wcf, bf;
    Tensor wxc, whc, bc;
    Tensor wxo, who, wco, bo;
};

struct CellOut {
    Tensor h, c;
};

/// Peephole ConvLSTM step; the output gate reads the updated cell state.
inline CellOut cell_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                         const CellWeights& w) {
    const Tensor gate_i =
        map_sigmoid(add(add(conv1d(x, w.wxi, w.bi), conv1d(h_prev, w.whi, Tensor({w.bi.dim(0)}))),
                        hadamard(w.wci, c_prev)));
    const Tensor gate_f =
        map_sigmoid(add(add(conv1d(x, w.wxf, w.bf), conv1d(h_prev, w.whf, Tensor({w.bf.dim(0)}))),
                        hadamard(w.wcf, c_prev)));
    const Tensor cand =
        map_tanh(add(conv1d(x, w.wxc, w.bc), conv1d(h_prev, w.whc, Tensor({w.bc.dim(0)}))));
    const Tensor c_new = add(hadamard(gate_f, c_prev), hadamard(gate_i, cand));
    const Tensor gate_o =
        map_sigmoid(add(add(conv1d(x, w.wxo, w.bo), conv1d(h_prev, w.who, Tensor({w.bo.dim(0)}))),
                        hadamard(w.wco, c_new)));
    return CellOut{hadamard(gate_o, map_tanh(c_new)), c_new};
}

inline Tensor prototype_mean(const std::vector<Tensor>& embs) {
    Tensor out = Tensor::zeros(embs.front().shape);
    for (const Tensor& e : embs)
        for (int i = 0; i < out.size(); ++i) out.v[std::size_t(i)] += e.v[std::size_t(i)];
    for (auto& x : out.v) x /= double(embs.size());
    return out;
}

inline double sq_distance(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (int i = 0; i < a.size(); ++i) {
        const double d = a.v[std::size_t(i)] - b.v[std::size_t(i)];
        acc += d * d;
    }
    return acc;
}

/// Two-class softmax over negated squared distances, computed by subtracting
/// the smaller distance before exponentiating.
inline void posterior2(const Tensor& q, const Tensor& c_target, const Tensor& c_null,
                       double* p_target, double* p_null) {
    const double d_t = sq_distance(q, c_target);
    const double d_n = sq_distance(q, c_null);
    const double m = std::min(d_t, d_n);
    const double et = std::exp(-(d_t - m));
    const double en = std::exp(-(d_n - m));
    *p_target = et / (et + en);
    *p_null = en / (et + en);
}

/// -log p(label) in log-sum-exp form.
inline double nll(const Tensor& q, const Tensor& c_target, const Tensor& c_null, bool label_target) {
    const double d_t = sq_distance(q, c_target);
    const double d_n = sq_distance(q, c_null);
    const double m = std::min(d_t, d_n);
    const double lse = std::log(std::exp(-(d_t - m)) + std::exp(-(d_n - m)));
    const double d_label = label_target ? d_t : d_n;
    return (d_label - m) + lse;
}

/// Embedder reference: conv -> tanh -> mean pool -> dense.
inline Tensor embed(const Tensor& encoding, const Tensor& conv_w, const Tensor& conv_b,
                    const Tensor& dense_w, const Tensor& dense_b) {
    return dense(mean_pool(map_tanh(conv1d(encoding, conv_w, conv_b))), dense_w, dense_b);
}

}  // namespace oracle

#endif  // NETPRINT_TESTS_ORACLE_HPP
