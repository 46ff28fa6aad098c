#include "netprint/tape.hpp"

#include <cmath>
#include <unordered_set>

#include "netprint/error.hpp"
#include "netprint/rng.hpp"

namespace netprint {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace

NodeId Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> backprop) {
    if (!recording_) {
        needs_grad = false;
        backprop = nullptr;
    }
    nodes_.push_back(Node{std::move(value), Tensor{}, needs_grad, std::move(backprop)});
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Tape::grad_buf(NodeId id) {
    Node& n = nodes_[std::size_t(id)];
    if (n.grad.v.empty()) n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
}

void Tape::accumulate(NodeId id, const Tensor& g) {
    if (!wants_grad(id)) return;
    Tensor& buf = grad_buf(id);
    for (int i = 0; i < buf.size(); ++i) buf.v[std::size_t(i)] += g.v[std::size_t(i)];
}

NodeId Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

NodeId Tape::param(const ParamStore& store, const std::string& name) {
    for (const auto& [bound, id] : param_nodes_)
        if (bound == name) return id;
    NodeId id = push(store.at(name), true, nullptr);
    if (recording_) param_nodes_.emplace_back(name, id);
    return id;
}

double Tape::scalar(NodeId id) const {
    const Tensor& t = value(id);
    NP_REQUIRE(t.size() == 1, "node is not a scalar");
    return t.v[0];
}

NodeId Tape::add(NodeId a, NodeId b) {
    const NodeId xs[2] = {a, b};
    return add_n(xs);
}

NodeId Tape::add_n(std::span<const NodeId> xs) {
    NP_REQUIRE(!xs.empty(), "add_n over empty set");
    Tensor out = value(xs[0]);
    bool needs = wants_grad(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const Tensor& t = value(xs[i]);
        NP_REQUIRE(t.same_shape(out), "add: shape mismatch " + out.shape_str() + " vs " + t.shape_str());
        for (int j = 0; j < out.size(); ++j) out.v[std::size_t(j)] += t.v[std::size_t(j)];
        needs = needs || wants_grad(xs[i]);
    }
    std::vector<NodeId> parents(xs.begin(), xs.end());
    NodeId id = push(std::move(out), needs, nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, parents](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            for (NodeId p : parents) t.accumulate(p, g);
        };
    }
    return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    NP_REQUIRE(ta.same_shape(tb), "sub: shape mismatch");
    Tensor out = ta;
    for (int j = 0; j < out.size(); ++j) out.v[std::size_t(j)] -= tb.v[std::size_t(j)];
    NodeId id = push(std::move(out), wants_grad(a) || wants_grad(b), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a, b](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            if (t.wants_grad(a)) t.accumulate(a, g);
            if (t.wants_grad(b)) {
                Tensor& gb = t.grad_buf(b);
                for (int j = 0; j < gb.size(); ++j) gb.v[std::size_t(j)] -= g.v[std::size_t(j)];
            }
        };
    }
    return id;
}

NodeId Tape::scale(NodeId a, double c) {
    Tensor out = value(a);
    for (auto& x : out.v) x *= c;
    NodeId id = push(std::move(out), wants_grad(a), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a, c](Tape& t) {
            if (!t.wants_grad(a)) return;
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            Tensor& ga = t.grad_buf(a);
            for (int j = 0; j < ga.size(); ++j) ga.v[std::size_t(j)] += c * g.v[std::size_t(j)];
        };
    }
    return id;
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    NP_REQUIRE(ta.same_shape(tb), "hadamard: shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out = ta;
    for (int j = 0; j < out.size(); ++j) out.v[std::size_t(j)] *= tb.v[std::size_t(j)];
    NodeId id = push(std::move(out), wants_grad(a) || wants_grad(b), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a, b](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            if (t.wants_grad(a)) {
                const Tensor& vb = t.value(b);
                Tensor& ga = t.grad_buf(a);
                for (int j = 0; j < ga.size(); ++j)
                    ga.v[std::size_t(j)] += vb.v[std::size_t(j)] * g.v[std::size_t(j)];
            }
            if (t.wants_grad(b)) {
                const Tensor& va = t.value(a);
                Tensor& gb = t.grad_buf(b);
                for (int j = 0; j < gb.size(); ++j)
                    gb.v[std::size_t(j)] += va.v[std::size_t(j)] * g.v[std::size_t(j)];
            }
        };
    }
    return id;
}

NodeId Tape::sigmoid(NodeId a) {
    Tensor out = value(a);
    for (auto& x : out.v) x = stable_sigmoid(x);
    NodeId id = push(std::move(out), wants_grad(a), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a](Tape& t) {
            if (!t.wants_grad(a)) return;
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            const Tensor& s = t.value(id);
            Tensor& ga = t.grad_buf(a);
            for (int j = 0; j < ga.size(); ++j) {
                const double sj = s.v[std::size_t(j)];
                ga.v[std::size_t(j)] += sj * (1.0 - sj) * g.v[std::size_t(j)];
            }
        };
    }
    return id;
}

NodeId Tape::tanh(NodeId a) {
    Tensor out = value(a);
    for (auto& x : out.v) x = std::tanh(x);
    NodeId id = push(std::move(out), wants_grad(a), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a](Tape& t) {
            if (!t.wants_grad(a)) return;
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            const Tensor& y = t.value(id);
            Tensor& ga = t.grad_buf(a);
            for (int j = 0; j < ga.size(); ++j) {
                const double yj = y.v[std::size_t(j)];
                ga.v[std::size_t(j)] += (1.0 - yj * yj) * g.v[std::size_t(j)];
            }
        };
    }
    return id;
}

NodeId Tape::conv1d(NodeId x, NodeId w, NodeId b) {
    const Tensor& tx = value(x);
    const Tensor& tw = value(w);
    const Tensor& tb = value(b);
    NP_REQUIRE(tx.rank() == 2 && tw.rank() == 3 && tb.rank() == 1, "conv1d: bad ranks");
    const int L = tx.dim(0), cin = tx.dim(1);
    const int k = tw.dim(0), cout = tw.dim(2);
    NP_REQUIRE(k % 2 == 1, "conv1d: kernel must be odd");
    NP_REQUIRE(tw.dim(1) == cin, "conv1d: Cin mismatch");
    NP_REQUIRE(tb.dim(0) == cout, "conv1d: bias size mismatch");
    const int off = k / 2;

    Tensor out({L, cout});
    for (int p = 0; p < L; ++p) {
        double* orow = &out.v[std::size_t(p) * cout];
        for (int co = 0; co < cout; ++co) orow[co] = tb.v[std::size_t(co)];
        for (int dk = 0; dk < k; ++dk) {
            const int r = p + dk - off;
            if (r < 0 || r >= L) continue;
            const double* xrow = &tx.v[std::size_t(r) * cin];
            const double* wk = &tw.v[std::size_t(dk) * cin * cout];
            for (int ci = 0; ci < cin; ++ci) {
                const double xv = xrow[ci];
                const double* wrow = wk + std::size_t(ci) * cout;
                for (int co = 0; co < cout; ++co) orow[co] += xv * wrow[co];
            }
        }
    }

    NodeId id = push(std::move(out), wants_grad(x) || wants_grad(w) || wants_grad(b), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, x, w, b, L, cin, k, cout, off](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            const Tensor& tx2 = t.value(x);
            const Tensor& tw2 = t.value(w);
            if (t.wants_grad(b)) {
                Tensor& gb = t.grad_buf(b);
                for (int p = 0; p < L; ++p)
                    for (int co = 0; co < cout; ++co)
                        gb.v[std::size_t(co)] += g.v[std::size_t(p) * cout + co];
            }
            if (t.wants_grad(w)) {
                Tensor& gw = t.grad_buf(w);
                for (int p = 0; p < L; ++p) {
                    const double* grow = &g.v[std::size_t(p) * cout];
                    for (int dk = 0; dk < k; ++dk) {
                        const int r = p + dk - off;
                        if (r < 0 || r >= L) continue;
                        const double* xrow = &tx2.v[std::size_t(r) * cin];
                        double* gwk = &gw.v[std::size_t(dk) * cin * cout];
                        for (int ci = 0; ci < cin; ++ci) {
                            const double xv = xrow[ci];
                            double* gwrow = gwk + std::size_t(ci) * cout;
                            for (int co = 0; co < cout; ++co) gwrow[co] += xv * grow[co];
                        }
                    }
                }
            }
            if (t.wants_grad(x)) {
                Tensor& gx = t.grad_buf(x);
                for (int p = 0; p < L; ++p) {
                    const double* grow = &g.v[std::size_t(p) * cout];
                    for (int dk = 0; dk < k; ++dk) {
                        const int r = p + dk - off;
                        if (r < 0 || r >= L) continue;
                        const double* wk = &tw2.v[std::size_t(dk) * cin * cout];
                        double* gxrow = &gx.v[std::size_t(r) * cin];
                        for (int ci = 0; ci < cin; ++ci) {
                            const double* wrow = wk + std::size_t(ci) * cout;
                            double acc = 0.0;
                            for (int co = 0; co < cout; ++co) acc += wrow[co] * grow[co];
                            gxrow[ci] += acc;
                        }
                    }
                }
            }
        };
    }
    return id;
}

NodeId Tape::conv1d_onehot(std::span<const int> rows, NodeId w, NodeId b) {
    const Tensor& tw = value(w);
    const Tensor& tb = value(b);
    NP_REQUIRE(tw.rank() == 3 && tb.rank() == 1, "conv1d_onehot: bad ranks");
    const int L = static_cast<int>(rows.size());
    const int k = tw.dim(0), cin = tw.dim(1), cout = tw.dim(2);
    NP_REQUIRE(k % 2 == 1, "conv1d_onehot: kernel must be odd");
    NP_REQUIRE(tb.dim(0) == cout, "conv1d_onehot: bias size mismatch");
    for (int r : rows) NP_REQUIRE(r >= 0 && r < cin, "conv1d_onehot: row index out of alphabet");
    const int off = k / 2;

    Tensor out({L, cout});
    for (int p = 0; p < L; ++p) {
        double* orow = &out.v[std::size_t(p) * cout];
        for (int co = 0; co < cout; ++co) orow[co] = tb.v[std::size_t(co)];
        for (int dk = 0; dk < k; ++dk) {
            const int r = p + dk - off;
            if (r < 0 || r >= L) continue;
            const double* wrow = &tw.v[(std::size_t(dk) * cin + rows[std::size_t(r)]) * cout];
            for (int co = 0; co < cout; ++co) orow[co] += wrow[co];
        }
    }

    NodeId id = push(std::move(out), wants_grad(w) || wants_grad(b), nullptr);
    if (recording_) {
        row_pool_.emplace_back(rows.begin(), rows.end());
        const std::size_t rows_idx = row_pool_.size() - 1;
        nodes_[std::size_t(id)].backprop = [id, w, b, rows_idx, L, cin, k, cout, off](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            const std::vector<int>& rws = t.row_pool_[rows_idx];
            if (t.wants_grad(b)) {
                Tensor& gb = t.grad_buf(b);
                for (int p = 0; p < L; ++p)
                    for (int co = 0; co < cout; ++co)
                        gb.v[std::size_t(co)] += g.v[std::size_t(p) * cout + co];
            }
            if (t.wants_grad(w)) {
                Tensor& gw = t.grad_buf(w);
                for (int p = 0; p < L; ++p) {
                    const double* grow = &g.v[std::size_t(p) * cout];
                    for (int dk = 0; dk < k; ++dk) {
                        const int r = p + dk - off;
                        if (r < 0 || r >= L) continue;
                        double* gwrow = &gw.v[(std::size_t(dk) * cin + rws[std::size_t(r)]) * cout];
                        for (int co = 0; co < cout; ++co) gwrow[co] += grow[co];
                    }
                }
            }
        };
    }
    return id;
}

NodeId Tape::dense(NodeId x, NodeId w, NodeId b) {
    const Tensor& tx = value(x);
    const Tensor& tw = value(w);
    const Tensor& tb = value(b);
    NP_REQUIRE(tx.rank() == 1 && tw.rank() == 2 && tb.rank() == 1, "dense: bad ranks");
    const int n = tx.dim(0), m = tw.dim(1);
    NP_REQUIRE(tw.dim(0) == n, "dense: weight rows mismatch");
    NP_REQUIRE(tb.dim(0) == m, "dense: bias size mismatch");

    Tensor out({m});
    for (int j = 0; j < m; ++j) out.v[std::size_t(j)] = tb.v[std::size_t(j)];
    for (int i = 0; i < n; ++i) {
        const double xv = tx.v[std::size_t(i)];
        const double* wrow = &tw.v[std::size_t(i) * m];
        for (int j = 0; j < m; ++j) out.v[std::size_t(j)] += xv * wrow[j];
    }

    NodeId id = push(std::move(out), wants_grad(x) || wants_grad(w) || wants_grad(b), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, x, w, b, n, m](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            if (t.wants_grad(b)) t.accumulate(b, g);
            if (t.wants_grad(w)) {
                const Tensor& tx2 = t.value(x);
                Tensor& gw = t.grad_buf(w);
                for (int i = 0; i < n; ++i) {
                    const double xv = tx2.v[std::size_t(i)];
                    double* gwrow = &gw.v[std::size_t(i) * m];
                    for (int j = 0; j < m; ++j) gwrow[j] += xv * g.v[std::size_t(j)];
                }
            }
            if (t.wants_grad(x)) {
                const Tensor& tw2 = t.value(w);
                Tensor& gx = t.grad_buf(x);
                for (int i = 0; i < n; ++i) {
                    const double* wrow = &tw2.v[std::size_t(i) * m];
                    double acc = 0.0;
                    for (int j = 0; j < m; ++j) acc += wrow[j] * g.v[std::size_t(j)];
                    gx.v[std::size_t(i)] += acc;
                }
            }
        };
    }
    return id;
}

NodeId Tape::mean_pool(NodeId x) {
    const Tensor& tx = value(x);
    NP_REQUIRE(tx.rank() == 2, "mean_pool: expects rank-2 input");
    const int L = tx.dim(0), c = tx.dim(1);
    NP_REQUIRE(L >= 1, "mean_pool: empty axis");
    Tensor out({c});
    for (int p = 0; p < L; ++p)
        for (int j = 0; j < c; ++j) out.v[std::size_t(j)] += tx.v[std::size_t(p) * c + j];
    for (int j = 0; j < c; ++j) out.v[std::size_t(j)] /= L;

    NodeId id = push(std::move(out), wants_grad(x), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, x, L, c](Tape& t) {
            if (!t.wants_grad(x)) return;
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            Tensor& gx = t.grad_buf(x);
            for (int p = 0; p < L; ++p)
                for (int j = 0; j < c; ++j)
                    gx.v[std::size_t(p) * c + j] += g.v[std::size_t(j)] / L;
        };
    }
    return id;
}

NodeId Tape::mse(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    NP_REQUIRE(ta.same_shape(tb), "mse: shape mismatch");
    const int n = ta.size();
    NP_REQUIRE(n > 0, "mse: empty tensors");
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double d = ta.v[std::size_t(j)] - tb.v[std::size_t(j)];
        acc += d * d;
    }
    Tensor out = Tensor::scalar(acc / n);

    NodeId id = push(std::move(out), wants_grad(a) || wants_grad(b), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a, b, n](Tape& t) {
            const double g = t.nodes_[std::size_t(id)].grad.v[0];
            const Tensor& va = t.value(a);
            const Tensor& vb = t.value(b);
            const double scale = 2.0 * g / n;
            if (t.wants_grad(a)) {
                Tensor& ga = t.grad_buf(a);
                for (int j = 0; j < n; ++j)
                    ga.v[std::size_t(j)] += scale * (va.v[std::size_t(j)] - vb.v[std::size_t(j)]);
            }
            if (t.wants_grad(b)) {
                Tensor& gb = t.grad_buf(b);
                for (int j = 0; j < n; ++j)
                    gb.v[std::size_t(j)] -= scale * (va.v[std::size_t(j)] - vb.v[std::size_t(j)]);
            }
        };
    }
    return id;
}

NodeId Tape::sqdist(NodeId a, NodeId b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    NP_REQUIRE(ta.same_shape(tb), "sqdist: shape mismatch");
    const int n = ta.size();
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double d = ta.v[std::size_t(j)] - tb.v[std::size_t(j)];
        acc += d * d;
    }
    NodeId id = push(Tensor::scalar(acc), wants_grad(a) || wants_grad(b), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a, b, n](Tape& t) {
            const double g = t.nodes_[std::size_t(id)].grad.v[0];
            const Tensor& va = t.value(a);
            const Tensor& vb = t.value(b);
            if (t.wants_grad(a)) {
                Tensor& ga = t.grad_buf(a);
                for (int j = 0; j < n; ++j)
                    ga.v[std::size_t(j)] += 2.0 * g * (va.v[std::size_t(j)] - vb.v[std::size_t(j)]);
            }
            if (t.wants_grad(b)) {
                Tensor& gb = t.grad_buf(b);
                for (int j = 0; j < n; ++j)
                    gb.v[std::size_t(j)] -= 2.0 * g * (va.v[std::size_t(j)] - vb.v[std::size_t(j)]);
            }
        };
    }
    return id;
}

NodeId Tape::softplus(NodeId a) {
    NP_REQUIRE(value(a).size() == 1, "softplus: scalar input expected");
    const double x = value(a).v[0];
    NodeId id = push(Tensor::scalar(stable_softplus(x)), wants_grad(a), nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, a, x](Tape& t) {
            if (!t.wants_grad(a)) return;
            const double g = t.nodes_[std::size_t(id)].grad.v[0];
            t.grad_buf(a).v[0] += stable_sigmoid(x) * g;
        };
    }
    return id;
}

NodeId Tape::mean_n(std::span<const NodeId> xs) {
    NP_REQUIRE(!xs.empty(), "mean_n over empty set");
    Tensor out = value(xs[0]);
    bool needs = wants_grad(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const Tensor& t = value(xs[i]);
        NP_REQUIRE(t.same_shape(out), "mean_n: shape mismatch");
        for (int j = 0; j < out.size(); ++j) out.v[std::size_t(j)] += t.v[std::size_t(j)];
        needs = needs || wants_grad(xs[i]);
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& x : out.v) x *= inv;

    std::vector<NodeId> parents(xs.begin(), xs.end());
    NodeId id = push(std::move(out), needs, nullptr);
    if (recording_) {
        nodes_[std::size_t(id)].backprop = [id, parents, inv](Tape& t) {
            const Tensor& g = t.nodes_[std::size_t(id)].grad;
            for (NodeId p : parents) {
                if (!t.wants_grad(p)) continue;
                Tensor& gp = t.grad_buf(p);
                for (int j = 0; j < gp.size(); ++j) gp.v[std::size_t(j)] += inv * g.v[std::size_t(j)];
            }
        };
    }
    return id;
}

void Tape::backward(NodeId loss) {
    NP_REQUIRE(recording_, "backward on a non-recording tape");
    NP_REQUIRE(value(loss).size() == 1, "backward: loss must be scalar");
    grad_buf(loss).v[0] = 1.0;
    for (NodeId i = loss; i >= 0; --i) {
        Node& n = nodes_[std::size_t(i)];
        if (n.backprop && !n.grad.v.empty()) n.backprop(*this);
    }
}

Tensor Tape::grad(NodeId id) const {
    const Node& n = nodes_[std::size_t(id)];
    if (n.grad.v.empty()) return Tensor::zeros(n.value.shape);
    return n.grad;
}

GradMap Tape::param_grads() const {
    GradMap out;
    for (const auto& [name, id] : param_nodes_) out.emplace(name, grad(id));
    return out;
}

void Tape::clear() {
    nodes_.clear();
    param_nodes_.clear();
    row_pool_.clear();
}

GradCheckReport grad_check(const ScalarGraph& f, ParamStore& params, double h,
                           int min_elements, std::uint64_t seed) {
    GradMap tape_grads;
    f(params, &tape_grads);

    // Flatten the element index space across all parameters.
    std::vector<long> starts(params.size() + 1, 0);
    for (std::size_t i = 0; i < params.size(); ++i)
        starts[i + 1] = starts[i] + params.value(i).size();
    const long total = starts[params.size()];

    std::vector<long> picks;
    if (total <= min_elements) {
        picks.resize(std::size_t(total));
        for (long i = 0; i < total; ++i) picks[std::size_t(i)] = i;
    } else {
        Rng rng(seed);
        std::unordered_set<long> seen;
        while (static_cast<int>(picks.size()) < min_elements) {
            const long c = static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
            if (seen.insert(c).second) picks.push_back(c);
        }
    }

    GradCheckReport report;
    for (long flat : picks) {
        std::size_t pi = 0;
        while (starts[pi + 1] <= flat) ++pi;
        const int ei = static_cast<int>(flat - starts[pi]);
        const std::string& name = params.names()[pi];

        double& slot = params.value(pi).v[std::size_t(ei)];
        const double orig = slot;
        slot = orig + h;
        const double lp = f(params, nullptr);
        slot = orig - h;
        const double lm = f(params, nullptr);
        slot = orig;

        const double fd = (lp - lm) / (2.0 * h);
        double gt = 0.0;
        auto it = tape_grads.find(name);
        if (it != tape_grads.end()) gt = it->second.v[std::size_t(ei)];

        const double denom = std::max({std::fabs(gt), std::fabs(fd), 1e-8});
        const double rel = std::fabs(gt - fd) / denom;
        ++report.elements_checked;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = name;
            report.worst_index = ei;
            report.worst_tape = gt;
            report.worst_fd = fd;
        }
    }
    return report;
}

}  // namespace netprint
