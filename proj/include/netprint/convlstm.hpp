#ifndef NETPRINT_CONVLSTM_HPP
#define NETPRINT_CONVLSTM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "netprint/codec.hpp"
#include "netprint/params.hpp"
#include "netprint/tape.hpp"

namespace netprint {

struct ConvLstmConfig {
    int hidden_channels = 16;
    int kernel = 5;  // must be odd

    void validate() const;
};

/// Hidden and cell state of one ConvLSTM layer, both [L x Hc].
struct CellState {
    Tensor h;
    Tensor c;

    static CellState zeros(int length, int hidden_channels);
};

// Parameter naming inside a ParamStore. Each cell owns, per gate
// (input/forget/cell/output): an input convolution, a state convolution,
// a bias, and for the input/forget/output gates an elementwise peephole
// weight on the cell state. The decoder additionally owns a width-1 output
// projection back to alphabet channels.
std::vector<std::string> cell_param_names(const std::string& prefix);

/// Fresh autoencoder parameters (encoder "enc.", decoder "dec." + projection),
/// Glorot for convolutions, zeros for peepholes, forget bias 1.
ParamStore init_autoencoder_params(const CodecConfig& codec, const ConvLstmConfig& cfg,
                                   std::uint64_t seed);

/// Node handles for one cell's parameters bound on a tape.
struct CellParamIds {
    NodeId conv_x[4];  // input, forget, cell, output
    NodeId conv_h[4];
    NodeId peep[3];  // input, forget, output
    NodeId bias[4];
};

struct CellStateIds {
    NodeId h;
    NodeId c;
};

CellParamIds bind_cell_params(Tape& tape, const ParamStore& params, const std::string& prefix);

/// One recurrence step with a dense input node [L x Cin].
CellStateIds cell_step(Tape& tape, NodeId x, const CellStateIds& prev, const CellParamIds& p);

/// One recurrence step with a one-hot input given as row indices.
CellStateIds cell_step_onehot(Tape& tape, std::span<const int> rows, const CellStateIds& prev,
                              const CellParamIds& p);

/// Tensor-level single step (frozen parameters); shared graph code underneath.
CellState cell_step(const Tensor& x, const CellState& prev, const ParamStore& params,
                    const std::string& prefix);

/// Encoder pass over a window: returns one hidden-state node per timestep.
std::vector<NodeId> encode_on_tape(Tape& tape, const Window& window, const CellParamIds& enc,
                                   const CodecConfig& codec, const ConvLstmConfig& cfg);

/// Decoder pass over encoder outputs: second ConvLSTM plus width-1 projection
/// to [L x A] per timestep.
std::vector<NodeId> decode_on_tape(Tape& tape, const std::vector<NodeId>& encodings,
                                   const CellParamIds& dec, NodeId proj_w, NodeId proj_b,
                                   const CodecConfig& codec, const ConvLstmConfig& cfg);

/// Mean squared reconstruction error over all window elements, as a tape node.
NodeId recon_loss_on_tape(Tape& tape, const Window& window, const ParamStore& params,
                          const CodecConfig& codec, const ConvLstmConfig& cfg);

// --- frozen-parameter entry points (pure, parallel-safe) --------------------

/// Per-timestep encodings of a sample sequence from a zero initial state.
std::vector<Tensor> encode_sequence(const std::vector<PacketSample>& samples,
                                    const ParamStore& params, const CodecConfig& codec,
                                    const ConvLstmConfig& cfg);

std::vector<Tensor> encode_window(const Window& window, const ParamStore& params,
                                  const CodecConfig& codec, const ConvLstmConfig& cfg);

/// Stateless single-packet encoding (the query-point encoder).
Tensor encode_single(const PacketSample& sample, const ParamStore& params,
                     const CodecConfig& codec, const ConvLstmConfig& cfg);

std::vector<Tensor> decode_encodings(const std::vector<Tensor>& encodings,
                                     const ParamStore& params, const CodecConfig& codec,
                                     const ConvLstmConfig& cfg);

double recon_loss(const Window& window, const ParamStore& params, const CodecConfig& codec,
                  const ConvLstmConfig& cfg);

struct AutoencoderHyper {
    int epochs = 30;
    int batch_windows = 8;
    AdamConfig adam;
};

/// Phase-1 training: mini-batch Adam on the mean reconstruction loss.
/// Deterministic given (seed, corpus order, hyperparameters).
ParamStore train_autoencoder(const std::vector<Window>& corpus, const CodecConfig& codec,
                             const ConvLstmConfig& cfg, const AutoencoderHyper& hyper,
                             std::uint64_t seed, std::vector<double>* loss_curve);

}  // namespace netprint

#endif  // NETPRINT_CONVLSTM_HPP
