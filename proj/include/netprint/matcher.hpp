#ifndef NETPRINT_MATCHER_HPP
#define NETPRINT_MATCHER_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "netprint/codec.hpp"
#include "netprint/convlstm.hpp"
#include "netprint/protonet.hpp"

namespace netprint {

/// Everything a standalone scan needs: configs, network weights, the two
/// precomputed prototypes and the decision threshold.
struct FingerprintModel {
    std::uint32_t version = 1;
    CodecConfig codec;
    ConvLstmConfig lstm;
    EmbedConfig embed;
    ParamStore theta;  // autoencoder weights
    ParamStore phi;    // embedder weights
    Prototype target_proto;
    Prototype null_proto;
    double tau = 0.5;
    std::string target_label;
    std::uint64_t seed = 0;
};

/// Builds a fingerprint from the first window of the target's trace. The trace
/// must hold at least one full window.
FingerprintModel build_fingerprint(const std::filesystem::path& target_csv,
                                   const ParamStore& theta, const ParamStore& phi,
                                   const CodecConfig& codec, const ConvLstmConfig& lstm,
                                   const EmbedConfig& embed_cfg, double tau, std::uint64_t seed);

struct ScanRecord {
    int index = 0;
    double p_target = 0.0;
    bool flagged = false;
};

struct ScanResult {
    std::vector<ScanRecord> records;
    long flagged_count = 0;
    long total = 0;

    double flag_rate() const { return total ? double(flagged_count) / double(total) : 0.0; }
};

/// Classifies every line of the stream against the stored prototypes. The
/// prototypes are never recomputed; an empty stream yields an empty result.
ScanResult scan_stream(const FingerprintModel& model, const std::filesystem::path& stream_csv);

/// Scan over in-memory lines (already or not yet normalized).
ScanResult scan_lines(const FingerprintModel& model, const std::vector<std::string>& lines);

void write_scan_log(const ScanResult& result, std::ostream& out);

// --- persistence ------------------------------------------------------------
//
// Container layout ("DNP1"): 4 magic bytes, a little-endian u32 header length,
// the header as key=value lines, a u32 tensor count, then per tensor:
// u32 name length, name bytes, u32 rank, u32 dims[rank], raw little-endian
// f64 values. Weights-only bundles (no prototypes) use kind=weights.

void save_model(const FingerprintModel& model, const std::filesystem::path& path);
FingerprintModel load_model(const std::filesystem::path& path);

/// Train-time artifact: network weights and configs without prototypes.
struct WeightsBundle {
    std::uint32_t version = 1;
    CodecConfig codec;
    ConvLstmConfig lstm;
    EmbedConfig embed;
    ParamStore theta;
    ParamStore phi;
    std::uint64_t seed = 0;
    std::vector<std::string> train_devices;  // recorded for later evaluation
};

void save_weights(const WeightsBundle& bundle, const std::filesystem::path& path);
WeightsBundle load_weights(const std::filesystem::path& path);

}  // namespace netprint

#endif  // NETPRINT_MATCHER_HPP
