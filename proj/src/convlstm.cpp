#include "netprint/convlstm.hpp"

#include <array>

#include "netprint/error.hpp"
#include "netprint/rng.hpp"

namespace netprint {

namespace {
constexpr const char* kGateNames[4] = {"input", "forget", "cell", "output"};
constexpr const char* kPeepNames[3] = {"input", "forget", "output"};
}  // namespace

void ConvLstmConfig::validate() const {
    NP_REQUIRE(hidden_channels >= 1, "hidden_channels must be >= 1");
    NP_REQUIRE(kernel >= 1 && kernel % 2 == 1, "kernel must be odd and >= 1");
}

CellState CellState::zeros(int length, int hidden_channels) {
    return CellState{Tensor({length, hidden_channels}), Tensor({length, hidden_channels})};
}

std::vector<std::string> cell_param_names(const std::string& prefix) {
    std::vector<std::string> names;
    for (const char* g : kGateNames) names.push_back(prefix + ".conv_x_" + g);
    for (const char* g : kGateNames) names.push_back(prefix + ".conv_h_" + g);
    for (const char* g : kPeepNames) names.push_back(prefix + ".peep_" + g);
    for (const char* g : kGateNames) names.push_back(prefix + ".bias_" + g);
    return names;
}

namespace {

void add_cell_params(ParamStore& ps, const std::string& prefix, int in_channels, int length,
                     int hidden, int kernel, SplitMix64& seeds) {
    for (const char* g : kGateNames)
        ps.add(prefix + ".conv_x_" + g,
               seeded_init({kernel, in_channels, hidden}, InitScheme::UniformGlorot, seeds.next()));
    for (const char* g : kGateNames)
        ps.add(prefix + ".conv_h_" + g,
               seeded_init({kernel, hidden, hidden}, InitScheme::UniformGlorot, seeds.next()));
    for (const char* g : kPeepNames)
        ps.add(prefix + ".peep_" + g, seeded_init({length, hidden}, InitScheme::Zeros, seeds.next()));
    for (const char* g : kGateNames) {
        Tensor b = seeded_init({hidden}, InitScheme::Zeros, seeds.next());
        if (std::string(g) == "forget")
            for (auto& x : b.v) x = 1.0;  // open forget gate at start of training
        ps.add(prefix + ".bias_" + g, std::move(b));
    }
}

}  // namespace

ParamStore init_autoencoder_params(const CodecConfig& codec, const ConvLstmConfig& cfg,
                                   std::uint64_t seed) {
    codec.validate();
    cfg.validate();
    ParamStore ps;
    ps.rng_seed = seed;
    SplitMix64 seeds(Rng::derive(seed, 0x0ae));
    add_cell_params(ps, "enc", codec.alphabet_size, codec.max_len, cfg.hidden_channels,
                    cfg.kernel, seeds);
    add_cell_params(ps, "dec", cfg.hidden_channels, codec.max_len, cfg.hidden_channels,
                    cfg.kernel, seeds);
    ps.add("dec.proj_w", seeded_init({1, cfg.hidden_channels, codec.alphabet_size},
                                     InitScheme::UniformGlorot, seeds.next()));
    ps.add("dec.proj_b", seeded_init({codec.alphabet_size}, InitScheme::Zeros, seeds.next()));
    return ps;
}

CellParamIds bind_cell_params(Tape& tape, const ParamStore& params, const std::string& prefix) {
    CellParamIds ids{};
    for (int g = 0; g < 4; ++g) {
        ids.conv_x[g] = tape.param(params, prefix + ".conv_x_" + kGateNames[g]);
        ids.conv_h[g] = tape.param(params, prefix + ".conv_h_" + kGateNames[g]);
        ids.bias[g] = tape.param(params, prefix + ".bias_" + kGateNames[g]);
    }
    for (int g = 0; g < 3; ++g) ids.peep[g] = tape.param(params, prefix + ".peep_" + kPeepNames[g]);
    return ids;
}

namespace {

/// Shared gate wiring once the four input-convolution nodes are built.
CellStateIds finish_cell_step(Tape& tape, const std::array<NodeId, 4>& xconv,
                              const CellStateIds& prev, const CellParamIds& p) {
    // Input-to-state convolutions carry the gate bias; state-to-state
    // convolutions use a shared zero bias so the bias enters each gate once.
    const Tensor& h = tape.value(prev.h);
    const int hidden = h.dim(1);
    NodeId zero_bias = tape.constant(Tensor({hidden}));

    const NodeId hi = tape.conv1d(prev.h, p.conv_h[0], zero_bias);
    const NodeId hf = tape.conv1d(prev.h, p.conv_h[1], zero_bias);
    const NodeId hc = tape.conv1d(prev.h, p.conv_h[2], zero_bias);
    const NodeId ho = tape.conv1d(prev.h, p.conv_h[3], zero_bias);

    const NodeId gate_i_pre[] = {xconv[0], hi, tape.hadamard(p.peep[0], prev.c)};
    const NodeId gate_i = tape.sigmoid(tape.add_n(gate_i_pre));

    const NodeId gate_f_pre[] = {xconv[1], hf, tape.hadamard(p.peep[1], prev.c)};
    const NodeId gate_f = tape.sigmoid(tape.add_n(gate_f_pre));

    const NodeId cand = tape.tanh(tape.add(xconv[2], hc));
    const NodeId c_new =
        tape.add(tape.hadamard(gate_f, prev.c), tape.hadamard(gate_i, cand));

    // Output-gate peephole reads the freshly updated cell state.
    const NodeId gate_o_pre[] = {xconv[3], ho, tape.hadamard(p.peep[2], c_new)};
    const NodeId gate_o = tape.sigmoid(tape.add_n(gate_o_pre));

    const NodeId h_new = tape.hadamard(gate_o, tape.tanh(c_new));
    return CellStateIds{h_new, c_new};
}

}  // namespace

CellStateIds cell_step(Tape& tape, NodeId x, const CellStateIds& prev, const CellParamIds& p) {
    std::array<NodeId, 4> xconv{};
    for (int g = 0; g < 4; ++g) xconv[std::size_t(g)] = tape.conv1d(x, p.conv_x[g], p.bias[g]);
    return finish_cell_step(tape, xconv, prev, p);
}

CellStateIds cell_step_onehot(Tape& tape, std::span<const int> rows, const CellStateIds& prev,
                              const CellParamIds& p) {
    std::array<NodeId, 4> xconv{};
    for (int g = 0; g < 4; ++g)
        xconv[std::size_t(g)] = tape.conv1d_onehot(rows, p.conv_x[g], p.bias[g]);
    return finish_cell_step(tape, xconv, prev, p);
}

CellState cell_step(const Tensor& x, const CellState& prev, const ParamStore& params,
                    const std::string& prefix) {
    Tape tape(false);
    CellParamIds ids = bind_cell_params(tape, params, prefix);
    CellStateIds st{tape.constant(prev.h), tape.constant(prev.c)};
    CellStateIds next = cell_step(tape, tape.constant(x), st, ids);
    return CellState{tape.value(next.h), tape.value(next.c)};
}

std::vector<NodeId> encode_on_tape(Tape& tape, const Window& window, const CellParamIds& enc,
                                   const CodecConfig& codec, const ConvLstmConfig& cfg) {
    NP_REQUIRE(static_cast<int>(window.samples.size()) == codec.window_len,
               "window length mismatch");
    CellStateIds st{tape.constant(Tensor({codec.max_len, cfg.hidden_channels})),
                    tape.constant(Tensor({codec.max_len, cfg.hidden_channels}))};
    std::vector<NodeId> encodings;
    encodings.reserve(window.samples.size());
    for (const PacketSample& s : window.samples) {
        st = cell_step_onehot(tape, s.rows, st, enc);
        encodings.push_back(st.h);
    }
    return encodings;
}

std::vector<NodeId> decode_on_tape(Tape& tape, const std::vector<NodeId>& encodings,
                                   const CellParamIds& dec, NodeId proj_w, NodeId proj_b,
                                   const CodecConfig& codec, const ConvLstmConfig& cfg) {
    NP_REQUIRE(!encodings.empty(), "decode over empty encoding sequence");
    CellStateIds st{tape.constant(Tensor({codec.max_len, cfg.hidden_channels})),
                    tape.constant(Tensor({codec.max_len, cfg.hidden_channels}))};
    std::vector<NodeId> recons;
    recons.reserve(encodings.size());
    for (NodeId enc_t : encodings) {
        st = cell_step(tape, enc_t, st, dec);
        recons.push_back(tape.conv1d(st.h, proj_w, proj_b));
    }
    return recons;
}

NodeId recon_loss_on_tape(Tape& tape, const Window& window, const ParamStore& params,
                          const CodecConfig& codec, const ConvLstmConfig& cfg) {
    CellParamIds enc = bind_cell_params(tape, params, "enc");
    CellParamIds dec = bind_cell_params(tape, params, "dec");
    NodeId proj_w = tape.param(params, "dec.proj_w");
    NodeId proj_b = tape.param(params, "dec.proj_b");

    std::vector<NodeId> encodings = encode_on_tape(tape, window, enc, codec, cfg);
    std::vector<NodeId> recons = decode_on_tape(tape, encodings, dec, proj_w, proj_b, codec, cfg);

    std::vector<NodeId> step_losses;
    step_losses.reserve(recons.size());
    for (std::size_t t = 0; t < recons.size(); ++t) {
        NodeId target = tape.constant(window.samples[t].matrix(codec));
        step_losses.push_back(tape.mse(recons[t], target));
    }
    // Equal-sized groups, so the mean of per-step MSEs is the global MSE.
    return tape.mean_n(step_losses);
}

std::vector<Tensor> encode_sequence(const std::vector<PacketSample>& samples,
                                    const ParamStore& params, const CodecConfig& codec,
                                    const ConvLstmConfig& cfg) {
    Tape tape(false);
    CellParamIds enc = bind_cell_params(tape, params, "enc");
    CellStateIds st{tape.constant(Tensor({codec.max_len, cfg.hidden_channels})),
                    tape.constant(Tensor({codec.max_len, cfg.hidden_channels}))};
    std::vector<Tensor> out;
    out.reserve(samples.size());
    for (const PacketSample& s : samples) {
        st = cell_step_onehot(tape, s.rows, st, enc);
        out.push_back(tape.value(st.h));
    }
    return out;
}

std::vector<Tensor> encode_window(const Window& window, const ParamStore& params,
                                  const CodecConfig& codec, const ConvLstmConfig& cfg) {
    NP_REQUIRE(static_cast<int>(window.samples.size()) == codec.window_len,
               "window length mismatch");
    return encode_sequence(window.samples, params, codec, cfg);
}

Tensor encode_single(const PacketSample& sample, const ParamStore& params,
                     const CodecConfig& codec, const ConvLstmConfig& cfg) {
    return encode_sequence({sample}, params, codec, cfg).front();
}

std::vector<Tensor> decode_encodings(const std::vector<Tensor>& encodings,
                                     const ParamStore& params, const CodecConfig& codec,
                                     const ConvLstmConfig& cfg) {
    NP_REQUIRE(!encodings.empty(), "decode over empty encoding sequence");
    Tape tape(false);
    CellParamIds dec = bind_cell_params(tape, params, "dec");
    NodeId proj_w = tape.param(params, "dec.proj_w");
    NodeId proj_b = tape.param(params, "dec.proj_b");
    std::vector<NodeId> enc_ids;
    enc_ids.reserve(encodings.size());
    for (const Tensor& e : encodings) enc_ids.push_back(tape.constant(e));
    std::vector<NodeId> rec = decode_on_tape(tape, enc_ids, dec, proj_w, proj_b, codec, cfg);
    std::vector<Tensor> out;
    out.reserve(rec.size());
    for (NodeId id : rec) out.push_back(tape.value(id));
    return out;
}

double recon_loss(const Window& window, const ParamStore& params, const CodecConfig& codec,
                  const ConvLstmConfig& cfg) {
    Tape tape(false);
    return tape.scalar(recon_loss_on_tape(tape, window, params, codec, cfg));
}

ParamStore train_autoencoder(const std::vector<Window>& corpus, const CodecConfig& codec,
                             const ConvLstmConfig& cfg, const AutoencoderHyper& hyper,
                             std::uint64_t seed, std::vector<double>* loss_curve) {
    NP_REQUIRE(!corpus.empty(), "autoencoder corpus is empty");
    ParamStore params = init_autoencoder_params(codec, cfg, seed);
    Rng shuffle_rng(Rng::derive(seed, 0x51));

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Tape tape;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fisher-Yates with the project generator.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t begin = 0; begin < order.size(); begin += std::size_t(hyper.batch_windows)) {
            const std::size_t end = std::min(order.size(), begin + std::size_t(hyper.batch_windows));
            tape.clear();
            std::vector<NodeId> losses;
            losses.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i)
                losses.push_back(recon_loss_on_tape(tape, corpus[order[i]], params, codec, cfg));
            const NodeId batch_loss = tape.mean_n(losses);
            tape.backward(batch_loss);
            adam_step(params, tape.param_grads(), hyper.adam);
            if (loss_curve) loss_curve->push_back(tape.scalar(batch_loss));
        }
    }
    return params;
}

}  // namespace netprint
