#ifndef NETPRINT_TAPE_HPP
#define NETPRINT_TAPE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "netprint/params.hpp"
#include "netprint/tensor.hpp"

namespace netprint {

using NodeId = std::int32_t;

/// Reverse-mode tape over Tensor-valued nodes. Creation order is a topological
/// order of the graph, so the backward sweep simply walks node ids downward.
///
/// A tape created with recording=false evaluates forward values only and
/// skips all backward bookkeeping; the graph-building code is shared between
/// training and frozen inference, which keeps the two paths numerically
/// identical.
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }

    /// Leaf that never receives a gradient (inputs, targets).
    NodeId constant(Tensor value);

    /// Leaf bound to a named parameter: the value is copied from the store and
    /// its gradient is reported by param_grads(). Binding the same name twice
    /// returns the original node.
    NodeId param(const ParamStore& store, const std::string& name);

    // --- forward operations ------------------------------------------------
    NodeId add(NodeId a, NodeId b);
    NodeId add_n(std::span<const NodeId> xs);
    NodeId sub(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId sigmoid(NodeId a);
    NodeId tanh(NodeId a);

    /// Same-padded 1-D convolution: x [L x Cin], w [k x Cin x Cout] (k odd),
    /// b [Cout], output [L x Cout]. Out-of-range positions read as zero.
    NodeId conv1d(NodeId x, NodeId w, NodeId b);

    /// conv1d specialised for a one-hot input given as per-row alphabet
    /// indices; bit-identical to conv1d over the materialised one-hot matrix.
    NodeId conv1d_onehot(std::span<const int> rows, NodeId w, NodeId b);

    /// Affine map: x [n], w [n x m], b [m] -> [m].
    NodeId dense(NodeId x, NodeId w, NodeId b);

    /// Column means: x [L x C] -> [C].
    NodeId mean_pool(NodeId x);

    /// Mean over all elements of (a - b)^2; scalar.
    NodeId mse(NodeId a, NodeId b);

    /// Squared Euclidean distance between two same-shaped tensors; scalar.
    NodeId sqdist(NodeId a, NodeId b);

    /// log(1 + e^x) on a scalar, overflow-safe.
    NodeId softplus(NodeId a);

    /// Elementwise mean of n same-shaped nodes.
    NodeId mean_n(std::span<const NodeId> xs);

    // --- access --------------------------------------------------------------
    const Tensor& value(NodeId id) const { return nodes_[std::size_t(id)].value; }
    double scalar(NodeId id) const;
    std::size_t node_count() const { return nodes_.size(); }

    /// Reverse sweep from a scalar loss. Fills per-node gradients.
    void backward(NodeId loss);

    /// Gradient of the last backward() target w.r.t. this node (zeros if the
    /// node is off the path).
    Tensor grad(NodeId id) const;

    /// Gradients for every bound parameter, zero-filled when off the path.
    GradMap param_grads() const;

    void clear();

private:
    struct Node {
        Tensor value;
        Tensor grad;  // empty until touched by backward
        bool needs_grad = false;
        std::function<void(Tape&)> backprop;  // null for leaves
    };

    NodeId push(Tensor value, bool needs_grad, std::function<void(Tape&)> backprop);
    Tensor& grad_buf(NodeId id);
    bool has_grad(NodeId id) const { return !nodes_[std::size_t(id)].grad.v.empty(); }
    bool wants_grad(NodeId id) const { return nodes_[std::size_t(id)].needs_grad; }
    void accumulate(NodeId id, const Tensor& g);

    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, NodeId>> param_nodes_;
    std::vector<std::vector<int>> row_pool_;  // owns one-hot index vectors
    bool recording_;
};

// --- gradient checking -------------------------------------------------------

/// A differentiable scalar function over a parameter store. When `grads` is
/// non-null the callee must also produce tape gradients for every parameter it
/// used.
using ScalarGraph = std::function<double(ParamStore&, GradMap* grads)>;

struct GradCheckReport {
    double max_rel_error = 0.0;
    int elements_checked = 0;
    std::string worst_param;
    int worst_index = -1;
    double worst_tape = 0.0;
    double worst_fd = 0.0;

    bool passed(double tol) const { return elements_checked > 0 && max_rel_error <= tol; }
};

/// Central-finite-difference check of tape gradients on a random subsample of
/// at least `min_elements` parameter elements (all of them if fewer exist).
/// Relative error: |g_tape - g_fd| / max(|g_tape|, |g_fd|, 1e-8).
GradCheckReport grad_check(const ScalarGraph& f, ParamStore& params, double h,
                           int min_elements, std::uint64_t seed);

}  // namespace netprint

#endif  // NETPRINT_TAPE_HPP
