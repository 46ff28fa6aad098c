#include "netprint/protonet.hpp"

#include <cmath>

#include "netprint/error.hpp"
#include "netprint/rng.hpp"

namespace netprint {

void EmbedConfig::validate() const {
    NP_REQUIRE(embed_dim >= 2, "embed_dim must be >= 2");
    NP_REQUIRE(channels >= 1, "channels must be >= 1");
    NP_REQUIRE(kernel >= 1 && kernel % 2 == 1, "kernel must be odd and >= 1");
}

ParamStore init_embedder_params(const ConvLstmConfig& lstm, const EmbedConfig& cfg,
                                std::uint64_t seed) {
    lstm.validate();
    cfg.validate();
    ParamStore ps;
    ps.rng_seed = seed;
    SplitMix64 seeds(Rng::derive(seed, 0x0e0));
    ps.add("emb.conv_w", seeded_init({cfg.kernel, lstm.hidden_channels, cfg.channels},
                                     InitScheme::UniformGlorot, seeds.next()));
    ps.add("emb.conv_b", seeded_init({cfg.channels}, InitScheme::Zeros, seeds.next()));
    ps.add("emb.dense_w",
           seeded_init({cfg.channels, cfg.embed_dim}, InitScheme::UniformGlorot, seeds.next()));
    ps.add("emb.dense_b", seeded_init({cfg.embed_dim}, InitScheme::Zeros, seeds.next()));
    return ps;
}

EmbedParamIds bind_embedder_params(Tape& tape, const ParamStore& params) {
    return EmbedParamIds{tape.param(params, "emb.conv_w"), tape.param(params, "emb.conv_b"),
                         tape.param(params, "emb.dense_w"), tape.param(params, "emb.dense_b")};
}

NodeId embed_on_tape(Tape& tape, NodeId encoding, const EmbedParamIds& p) {
    NodeId conv = tape.conv1d(encoding, p.conv_w, p.conv_b);
    NodeId pooled = tape.mean_pool(tape.tanh(conv));
    return tape.dense(pooled, p.dense_w, p.dense_b);
}

Tensor embed(const Tensor& encoding, const ParamStore& params, const EmbedConfig& cfg) {
    cfg.validate();
    Tape tape(false);
    EmbedParamIds ids = bind_embedder_params(tape, params);
    return tape.value(embed_on_tape(tape, tape.constant(encoding), ids));
}

Prototype prototype(std::span<const Tensor> embeddings, ClassId class_id) {
    NP_REQUIRE(!embeddings.empty(), "prototype over empty support set");
    Tensor mean = Tensor::zeros(embeddings[0].shape);
    for (const Tensor& e : embeddings) {
        NP_REQUIRE(e.same_shape(mean), "prototype: embedding shape mismatch");
        for (int j = 0; j < mean.size(); ++j) mean.v[std::size_t(j)] += e.v[std::size_t(j)];
    }
    const double inv = 1.0 / static_cast<double>(embeddings.size());
    for (auto& x : mean.v) x *= inv;
    return Prototype{std::move(mean), class_id, static_cast<int>(embeddings.size())};
}

namespace {

double squared_distance(const Tensor& a, const Tensor& b) {
    NP_REQUIRE(a.same_shape(b), "distance: shape mismatch");
    double acc = 0.0;
    for (int j = 0; j < a.size(); ++j) {
        const double d = a.v[std::size_t(j)] - b.v[std::size_t(j)];
        acc += d * d;
    }
    return acc;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace

Posterior posterior(const Tensor& query, const Prototype& target, const Prototype& null_proto) {
    const double d_t = squared_distance(query, target.vector);
    const double d_n = squared_distance(query, null_proto.vector);
    // softmax(-d) over two classes reduces to a sigmoid of the distance gap;
    // equivalent to subtracting the smaller distance before exponentiating.
    return Posterior{stable_sigmoid(d_n - d_t), stable_sigmoid(d_t - d_n)};
}

double proto_loss(const Tensor& query, const Prototype& target, const Prototype& null_proto,
                  ClassId label) {
    const double d_t = squared_distance(query, target.vector);
    const double d_n = squared_distance(query, null_proto.vector);
    // -log softmax(-d_label) = softplus(d_label - d_other)
    return label == ClassId::Target ? stable_softplus(d_t - d_n) : stable_softplus(d_n - d_t);
}

double pair_loss(std::span<const Tensor> target_embeddings,
                 std::span<const Tensor> null_embeddings, const Tensor& query_embedding,
                 PairKind kind) {
    const Prototype c_t = prototype(target_embeddings, ClassId::Target);
    const Prototype c_n = prototype(null_embeddings, ClassId::Null);
    return proto_loss(query_embedding, c_t, c_n,
                      kind == PairKind::Positive ? ClassId::Target : ClassId::Null);
}

NodeId pair_loss_on_tape(Tape& tape, std::span<const NodeId> target_embeddings,
                         std::span<const NodeId> null_embeddings, NodeId query_embedding,
                         PairKind kind) {
    NP_REQUIRE(!target_embeddings.empty() && !null_embeddings.empty(),
               "pair_loss: empty support set");
    const NodeId c_t = tape.mean_n(target_embeddings);
    const NodeId c_n = tape.mean_n(null_embeddings);
    const NodeId d_t = tape.sqdist(query_embedding, c_t);
    const NodeId d_n = tape.sqdist(query_embedding, c_n);
    const NodeId gap =
        kind == PairKind::Positive ? tape.sub(d_t, d_n) : tape.sub(d_n, d_t);
    return tape.softplus(gap);
}

}  // namespace netprint
