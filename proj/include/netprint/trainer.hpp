#ifndef NETPRINT_TRAINER_HPP
#define NETPRINT_TRAINER_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "netprint/codec.hpp"
#include "netprint/convlstm.hpp"
#include "netprint/protonet.hpp"

namespace netprint {

/// Disjoint train / held-out device partition.
struct SplitSpec {
    std::vector<std::string> train_devices;
    std::vector<std::string> held_out_devices;

    bool is_train(const std::string& device_id) const;
};

/// Seeded shuffle, first ceil(ratio * N) devices become the training side.
SplitSpec split_devices(const std::vector<DeviceTrace>& corpus, double ratio, std::uint64_t seed);

/// One training episode: a support window plus a single query packet.
/// Positive pairs draw both from the same device with the query outside the
/// window; negative pairs draw the query from a different device.
struct PairEntry {
    Window window;
    PacketSample query;
    PairKind kind = PairKind::Positive;
    std::string window_device;
    std::string query_device;
    int window_offset = 0;
    int query_index = 0;
};

struct PairBatch {
    std::vector<PairEntry> entries;
};

/// offset_stride restricts window starts to a grid (1 = every offset); the
/// device and remaining draws stay uniform.
PairBatch sample_pairs(const std::vector<DeviceTrace>& corpus, const SplitSpec& split,
                       int batch_size, double pos_fraction, std::uint64_t seed,
                       int offset_stride = 1);

struct Phase2Hyper {
    int batches = 2000;
    int batch_size = 32;
    double pos_fraction = 0.5;
    int offset_stride = 5;  // support-window starts sampled on this grid
    AdamConfig adam;
};

/// Phase 2: embedder training on pair episodes against the frozen encoder.
ParamStore train_phase2(const ParamStore& theta, const std::vector<DeviceTrace>& corpus,
                        const SplitSpec& split, const CodecConfig& codec,
                        const ConvLstmConfig& lstm, const EmbedConfig& embed_cfg,
                        const Phase2Hyper& hyper, std::uint64_t seed,
                        std::vector<double>* loss_curve);

struct TrainerConfig {
    CodecConfig codec;
    ConvLstmConfig lstm;
    EmbedConfig embed;
    AutoencoderHyper phase1;
    Phase2Hyper phase2;
    int window_stride = 20;  // phase-1 window extraction
    double split_ratio = 0.5;
};

struct TrainArtifacts {
    ParamStore theta;  // autoencoder
    ParamStore phi;    // embedder
    SplitSpec split;
    std::vector<double> phase1_curve;
    std::vector<double> phase2_curve;
};

TrainArtifacts train_two_phase(const std::vector<DeviceTrace>& corpus, const TrainerConfig& cfg,
                               std::uint64_t seed);

// --- evaluation ---------------------------------------------------------------

struct DecisionRecord {
    int target_idx;    // into EvalReport::device_ids
    int source_idx;
    int packet_index;  // within the source trace
    double p_target;
    bool flagged;
};

struct TargetEval {
    std::string device_id;
    bool seen = false;
    bool skipped = false;  // trace shorter than one fingerprint window
    long correct = 0, total = 0;
    long tp = 0, fn = 0, tn = 0, fp = 0;
    double query_accuracy = 0.0;
    double tpr = 0.0, tnr = 0.0, balanced_accuracy = 0.0;
    double device_accuracy = 0.0;  // majority vote over each source device
};

struct EvalReport {
    std::vector<std::string> device_ids;
    std::vector<TargetEval> per_target;
    std::vector<DecisionRecord> decisions;
    long total_queries = 0;
    double overall_query_accuracy = 0.0;   // weighted by query count
    double overall_balanced = 0.0;         // mean over evaluated targets
    double overall_device_accuracy = 0.0;  // mean over evaluated targets
    double unseen_query_accuracy = 0.0;
    double unseen_balanced = 0.0;
};

/// Full scan protocol: every device in turn is the target (fingerprint = its
/// first window_len packets); every packet of every device is a query.
EvalReport evaluate(const std::vector<DeviceTrace>& corpus, const SplitSpec& split,
                    const ParamStore& theta, const ParamStore& phi, const CodecConfig& codec,
                    const ConvLstmConfig& lstm, const EmbedConfig& embed_cfg, double tau);

/// Audit helper: recompute the per-target counts and aggregates of `report`
/// purely from its decision records. Used to cross-check the evaluator.
EvalReport recompute_from_decisions(const EvalReport& report, const SplitSpec& split,
                                    double tau);

void write_decision_log(const EvalReport& report, std::ostream& out);
void write_eval_table(const EvalReport& report, std::ostream& out);

}  // namespace netprint

#endif  // NETPRINT_TRAINER_HPP
