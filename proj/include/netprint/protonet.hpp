#ifndef NETPRINT_PROTONET_HPP
#define NETPRINT_PROTONET_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "netprint/convlstm.hpp"
#include "netprint/params.hpp"
#include "netprint/tape.hpp"

namespace netprint {

/// Embedder architecture: conv (encoder channels -> channels, odd kernel),
/// tanh, mean-pool over positions, dense to the metric space.
struct EmbedConfig {
    int embed_dim = 32;
    int channels = 16;
    int kernel = 3;

    void validate() const;
};

enum class ClassId { Target, Null };
enum class PairKind { Positive, Negative };

/// Class centroid in the metric space: the arithmetic mean of its support
/// embeddings.
struct Prototype {
    Tensor vector;
    ClassId class_id = ClassId::Target;
    int support_count = 0;
};

/// Two-class membership probabilities; always sums to 1.
struct Posterior {
    double p_target = 0.0;
    double p_null = 0.0;
};

/// Fresh embedder parameters under the "emb." prefix.
ParamStore init_embedder_params(const ConvLstmConfig& lstm, const EmbedConfig& cfg,
                                std::uint64_t seed);

struct EmbedParamIds {
    NodeId conv_w;
    NodeId conv_b;
    NodeId dense_w;
    NodeId dense_b;
};

EmbedParamIds bind_embedder_params(Tape& tape, const ParamStore& params);

NodeId embed_on_tape(Tape& tape, NodeId encoding, const EmbedParamIds& p);

/// Frozen-parameter embedding of one encoder hidden state [L x Hc] -> [E].
Tensor embed(const Tensor& encoding, const ParamStore& params, const EmbedConfig& cfg);

Prototype prototype(std::span<const Tensor> embeddings, ClassId class_id);

/// Softmax over negated squared Euclidean distances to the two prototypes,
/// evaluated in log space.
Posterior posterior(const Tensor& query, const Prototype& target, const Prototype& null_proto);

/// Negative log posterior probability of the true class; never evaluates
/// log(0).
double proto_loss(const Tensor& query, const Prototype& target, const Prototype& null_proto,
                  ClassId label);

/// Episode loss: prototypes from the two support windows, then proto_loss with
/// the label implied by the pair kind (positive -> target, negative -> null).
double pair_loss(std::span<const Tensor> target_embeddings,
                 std::span<const Tensor> null_embeddings, const Tensor& query_embedding,
                 PairKind kind);

/// Taped version of pair_loss for training.
NodeId pair_loss_on_tape(Tape& tape, std::span<const NodeId> target_embeddings,
                         std::span<const NodeId> null_embeddings, NodeId query_embedding,
                         PairKind kind);

}  // namespace netprint

#endif  // NETPRINT_PROTONET_HPP
