#ifndef NETPRINT_SYNTHGEN_HPP
#define NETPRINT_SYNTHGEN_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "netprint/codec.hpp"

namespace netprint {

/// Line templates plus render-time numeric profile for one synthetic device.
/// Templates contain holes like {ep}, {seq}, {h4}, {tok} that are filled from
/// the device's random stream at render time.
struct DeviceGrammar {
    std::string device_id;
    std::string device_token;              // unique marker substring
    std::vector<std::string> templates;    // shared pool first, token templates after
    std::vector<double> template_weights;  // same order, sums to 1
    int port_base = 0;                     // ephemeral port profile
    int port_span = 0;
};

/// Grammars for n devices at the given similarity. The similarity knob sets
/// the fraction of token-free lines: 0 puts the device token on every line,
/// 1 removes it everywhere and collapses all devices onto one distribution.
/// In between, devices also lean toward a per-device subset of the shared
/// pool and a per-device ephemeral-port range, both of which widen back to
/// uniform as similarity approaches 1.
std::vector<DeviceGrammar> make_grammars(int n_devices, double similarity, std::uint64_t seed);

/// Render one line from a grammar using the device's stream.
std::string render_line(const DeviceGrammar& grammar, class Rng& rng);

std::vector<DeviceTrace> make_corpus(int n_devices, int lines_per_device, double similarity,
                                     std::uint64_t seed);

/// Writes the standard per-device CSV layout: <device_id>.csv, one line per packet.
void write_corpus(const std::vector<DeviceTrace>& corpus, const std::filesystem::path& dir);

}  // namespace netprint

#endif  // NETPRINT_SYNTHGEN_HPP
