#ifndef NETPRINT_CODEC_HPP
#define NETPRINT_CODEC_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "netprint/tensor.hpp"

namespace netprint {

/// Character alphabet and window geometry for packet encoding.
///
/// Alphabet layout (v1, fixed): index 0 = NUL padding, index 1 = the
/// out-of-vocabulary marker, indices 2..96 = printable ASCII 0x20..0x7E in
/// code-point order.
struct CodecConfig {
    int alphabet_size = 97;
    int max_len = 96;    // strings are truncated here
    int window_len = 20; // packets per window

    void validate() const;
};

inline constexpr char kOovChar = '\x1a';
inline constexpr int kNulIndex = 0;
inline constexpr int kOovIndex = 1;
inline constexpr const char* kNullClassLabel = "__null__";

/// One packet's info string as a fixed-size one-hot character matrix.
/// Rows are stored as alphabet indices; matrix() materialises the L x A
/// one-hot form on demand.
struct PacketSample {
    std::vector<int> rows;  // length = max_len, values in [0, alphabet_size)
    std::string raw;        // normalized source string, kept for reporting

    Tensor matrix(const CodecConfig& cfg) const;
};

/// Ordered sequence of exactly window_len packets.
struct Window {
    std::vector<PacketSample> samples;
    std::string label;
};

/// A device's packet info strings in capture order.
struct DeviceTrace {
    std::string device_id;
    std::vector<std::string> lines;
};

/// Replaces every character outside printable ASCII 0x20..0x7E with a single
/// OOV marker. Multi-byte UTF-8 sequences collapse to one marker per code
/// point; invalid bytes map to one marker each. Idempotent.
std::string normalize_string(std::string_view s);

/// Alphabet index for a normalized character.
int char_index(char c);

PacketSample encode_packet(std::string_view s, const CodecConfig& cfg);

/// Greedy inverse of encode_packet: argmax per row, trailing padding stripped.
std::string decode_sample(const PacketSample& sample);

/// The all-padding packet (encoding of the empty string).
PacketSample null_sample(const CodecConfig& cfg);

/// Consecutive windows [i, i+W) for i = 0, stride, 2*stride, ... Empty result
/// when the trace is shorter than one window.
std::vector<Window> build_windows(const DeviceTrace& trace, const CodecConfig& cfg, int stride);

/// window_len copies of the null sample, labelled as the null class.
Window null_window(const CodecConfig& cfg);

/// Loads one device trace: one info string per line, normalized, blanks
/// dropped; device id is the file stem.
DeviceTrace load_device_csv(const std::filesystem::path& path);

/// All *.csv traces in a directory, sorted by device id.
std::vector<DeviceTrace> load_corpus_dir(const std::filesystem::path& dir);

}  // namespace netprint

#endif  // NETPRINT_CODEC_HPP
