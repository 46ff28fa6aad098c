#include "netprint/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "netprint/error.hpp"
#include "netprint/rng.hpp"

namespace netprint {

namespace {

// Shared pool layout: even indices are long numeric TCP shapes, odd indices
// short textual ones, so each device's preferred pair {2d, 2d+1} spans both
// shapes while its content stays device-characteristic.
const std::vector<std::string>& shared_pool() {
    static const std::vector<std::string> pool = {
        "{ep} -> {sp} [SYN] Seq=0 Win={win} Len=0 MSS=1460",
        "HTTP/1.1 200 OK (text/plain)",
        "{sp} -> {ep} [SYN, ACK] Seq=0 Ack=1 Win={win} Len=0 MSS=1380",
        "HTTP/1.1 200 OK (application/json)",
        "{ep} -> {sp} [ACK] Seq={seq} Ack={ack} Win={win} Len=0",
        "HTTP/1.1 404 Not Found (text/html)",
        "{sp} -> {ep} [ACK] Seq={seq} Ack={ack} Win={win} Len=0",
        "GET / HTTP/1.1",
        "{ep} -> {sp} [PSH, ACK] Seq={seq} Ack={ack} Win={win} Len={len}",
        "M-SEARCH * HTTP/1.1",
        "{sp} -> {ep} [FIN, ACK] Seq={seq} Ack={ack} Win={win} Len=0",
        "NOTIFY * HTTP/1.1",
        "{ep} -> {sp} [RST, ACK] Seq={seq} Ack={ack} Win=0 Len=0",
        "Standard query 0x{h4} A {host}.local",
        "DHCP Request - Transaction ID 0x{h8}",
        "Standard query response 0x{h4} A {host}.local",
    };
    return pool;
}

std::vector<std::string> token_templates(const std::string& token) {
    return {
        "POST /cgi-bin/" + token + " HTTP/1.1 (application/x-www-form-urlencoded)",
        "GET /" + token + "/status?id=" + token + " HTTP/1.1",
        "Standard query 0x{h4} A " + token + "." + token + ".local",
        "NOTIFY * HTTP/1.1 (uuid:" + token + "-" + token + ")",
    };
}

constexpr int kEphemeralBase = 49152;
constexpr int kEphemeralSpan = 16384;
constexpr int kSubsetSize = 2;

std::string random_token(Rng& rng) {
    std::string t(16, 'a');
    for (auto& c : t) c = static_cast<char>('a' + rng.below_int(26));
    return t;
}

std::string hex_digits(Rng& rng, int n) {
    static const char* digits = "0123456789abcdef";
    std::string s(std::size_t(n), '0');
    for (auto& c : s) c = digits[rng.below_int(16)];
    return s;
}

}  // namespace

std::vector<DeviceGrammar> make_grammars(int n_devices, double similarity, std::uint64_t seed) {
    NP_REQUIRE(n_devices >= 2, "need at least 2 devices");
    NP_REQUIRE(similarity >= 0.0 && similarity <= 1.0, "similarity must be in [0,1]");

    const auto& pool = shared_pool();
    const int pool_size = static_cast<int>(pool.size());
    const double s = similarity;
    // Within the shared mass, devices draw from a small preferred subset with
    // probability 1 - s^2 and uniformly otherwise; the subsets are what keeps
    // intermediate similarities learnable without tokens on every line.
    const double subset_prob = 1.0 - s * s;

    Rng token_rng(Rng::derive(seed, 0x70c));
    std::set<std::string> used_tokens;

    std::vector<DeviceGrammar> grammars;
    grammars.reserve(std::size_t(n_devices));
    for (int d = 0; d < n_devices; ++d) {
        DeviceGrammar g;
        {
            std::string num = std::to_string(d);
            if (num.size() < 2) num.insert(num.begin(), '0');
            g.device_id = "device" + num;
        }
        do {
            g.device_token = random_token(token_rng);
        } while (!used_tokens.insert(g.device_token).second);

        g.templates = pool;
        const auto tok = token_templates(g.device_token);
        g.templates.insert(g.templates.end(), tok.begin(), tok.end());

        const int pref_a = (2 * d) % pool_size;
        const int pref_b = (2 * d + 1) % pool_size;
        g.template_weights.assign(g.templates.size(), 0.0);
        for (int j = 0; j < pool_size; ++j) {
            const bool preferred = (j == pref_a || j == pref_b);
            double w = s * (1.0 - subset_prob) / pool_size;
            if (preferred) w += s * subset_prob / kSubsetSize;
            g.template_weights[std::size_t(j)] = w;
        }
        for (std::size_t j = std::size_t(pool_size); j < g.templates.size(); ++j)
            g.template_weights[j] = (1.0 - s) / double(tok.size());

        g.port_base = kEphemeralBase + (d % 8) * (kEphemeralSpan / 8);
        g.port_span = static_cast<int>(
            std::lround((kEphemeralSpan / 8.0) * std::pow(8.0, s)));
        grammars.push_back(std::move(g));
    }
    return grammars;
}

std::string render_line(const DeviceGrammar& grammar, Rng& rng) {
    // Weighted template choice.
    double u = rng.uniform01();
    std::size_t choice = grammar.templates.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < grammar.template_weights.size(); ++j) {
        acc += grammar.template_weights[j];
        if (u < acc) {
            choice = j;
            break;
        }
    }

    static const int kServicePorts[] = {80, 443, 53, 1900, 8080};
    static const char* kHosts[] = {"gateway", "cloud", "update", "ntp"};

    const std::string& tpl = grammar.templates[choice];
    std::string out;
    out.reserve(tpl.size() + 16);
    for (std::size_t i = 0; i < tpl.size();) {
        if (tpl[i] != '{') {
            out.push_back(tpl[i++]);
            continue;
        }
        const std::size_t close = tpl.find('}', i);
        const std::string hole = tpl.substr(i + 1, close - i - 1);
        if (hole == "ep") {
            const int span = std::max(1, grammar.port_span);
            const int port = kEphemeralBase +
                             (grammar.port_base - kEphemeralBase + rng.below_int(span)) %
                                 kEphemeralSpan;
            out += std::to_string(port);
        } else if (hole == "sp") {
            out += std::to_string(kServicePorts[rng.below_int(5)]);
        } else if (hole == "seq" || hole == "ack") {
            out += std::to_string(rng.below_int(100000));
        } else if (hole == "win") {
            out += std::to_string(1024 + rng.below_int(65536 - 1024));
        } else if (hole == "len") {
            out += std::to_string(1 + rng.below_int(1460));
        } else if (hole == "h4") {
            out += hex_digits(rng, 4);
        } else if (hole == "h8") {
            out += hex_digits(rng, 8);
        } else if (hole == "host") {
            out += kHosts[rng.below_int(4)];
        } else {
            NP_REQUIRE(false, "unknown template hole {" + hole + "}");
        }
        i = close + 1;
    }
    return out;
}

std::vector<DeviceTrace> make_corpus(int n_devices, int lines_per_device, double similarity,
                                     std::uint64_t seed) {
    NP_REQUIRE(lines_per_device >= 1, "lines_per_device must be >= 1");
    const auto grammars = make_grammars(n_devices, similarity, seed);
    std::vector<DeviceTrace> corpus;
    corpus.reserve(grammars.size());
    for (std::size_t d = 0; d < grammars.size(); ++d) {
        Rng rng(Rng::derive(seed, 0x1000 + d));
        DeviceTrace trace;
        trace.device_id = grammars[d].device_id;
        trace.lines.reserve(std::size_t(lines_per_device));
        for (int i = 0; i < lines_per_device; ++i)
            trace.lines.push_back(render_line(grammars[d], rng));
        corpus.push_back(std::move(trace));
    }
    return corpus;
}

void write_corpus(const std::vector<DeviceTrace>& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& trace : corpus) {
        const auto path = dir / (trace.device_id + ".csv");
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        for (const auto& line : trace.lines) out << line << "\n";
    }
}

}  // namespace netprint
