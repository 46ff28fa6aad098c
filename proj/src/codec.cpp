#include "netprint/codec.hpp"

#include <algorithm>
#include <fstream>

#include "netprint/error.hpp"

namespace netprint {

void CodecConfig::validate() const {
    NP_REQUIRE(alphabet_size == 97, "alphabet_size must be 97 in format v1");
    NP_REQUIRE(max_len >= 1, "max_len must be >= 1");
    NP_REQUIRE(window_len == 20, "window_len is fixed at 20");
}

Tensor PacketSample::matrix(const CodecConfig& cfg) const {
    NP_REQUIRE(static_cast<int>(rows.size()) == cfg.max_len, "sample length mismatch");
    Tensor m({cfg.max_len, cfg.alphabet_size});
    for (int i = 0; i < cfg.max_len; ++i) m(i, rows[std::size_t(i)]) = 1.0;
    return m;
}

std::string normalize_string(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        if (c >= 0x20 && c <= 0x7e) {
            out.push_back(static_cast<char>(c));
            ++i;
            continue;
        }
        // Consume one UTF-8 code point (or a single invalid byte) and emit
        // exactly one OOV marker for it.
        std::size_t len = 1;
        if ((c & 0xe0) == 0xc0)
            len = 2;
        else if ((c & 0xf0) == 0xe0)
            len = 3;
        else if ((c & 0xf8) == 0xf0)
            len = 4;
        std::size_t j = i + 1;
        while (j < i + len && j < n && (static_cast<unsigned char>(s[j]) & 0xc0) == 0x80) ++j;
        out.push_back(kOovChar);
        i = j;
    }
    return out;
}

int char_index(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u <= 0x7e) return 2 + (u - 0x20);
    return kOovIndex;
}

PacketSample encode_packet(std::string_view s, const CodecConfig& cfg) {
    cfg.validate();
    PacketSample sample;
    sample.raw.assign(s);
    sample.rows.assign(std::size_t(cfg.max_len), kNulIndex);
    const int content = std::min<int>(cfg.max_len, static_cast<int>(s.size()));
    for (int i = 0; i < content; ++i) sample.rows[std::size_t(i)] = char_index(s[std::size_t(i)]);
    return sample;
}

std::string decode_sample(const PacketSample& sample) {
    std::string out;
    for (int idx : sample.rows) {
        if (idx == kNulIndex)
            out.push_back('\0');
        else if (idx == kOovIndex)
            out.push_back(kOovChar);
        else
            out.push_back(static_cast<char>(0x20 + (idx - 2)));
    }
    while (!out.empty() && out.back() == '\0') out.pop_back();
    return out;
}

PacketSample null_sample(const CodecConfig& cfg) { return encode_packet("", cfg); }

std::vector<Window> build_windows(const DeviceTrace& trace, const CodecConfig& cfg, int stride) {
    cfg.validate();
    NP_REQUIRE(stride >= 1, "stride must be >= 1");
    std::vector<Window> out;
    const int n = static_cast<int>(trace.lines.size());
    const int w = cfg.window_len;
    for (int start = 0; start + w <= n; start += stride) {
        Window win;
        win.label = trace.device_id;
        win.samples.reserve(std::size_t(w));
        for (int i = start; i < start + w; ++i)
            win.samples.push_back(encode_packet(trace.lines[std::size_t(i)], cfg));
        out.push_back(std::move(win));
    }
    return out;
}

Window null_window(const CodecConfig& cfg) {
    Window win;
    win.label = kNullClassLabel;
    win.samples.assign(std::size_t(cfg.window_len), null_sample(cfg));
    return win;
}

DeviceTrace load_device_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path.string());
    DeviceTrace trace;
    trace.device_id = path.stem().string();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        trace.lines.push_back(normalize_string(line));
    }
    if (trace.lines.empty())
        throw IoError("trace file has no non-blank lines: " + path.string());
    return trace;
}

std::vector<DeviceTrace> load_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("corpus directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    if (files.empty()) throw IoError("no .csv traces in " + dir.string());
    std::sort(files.begin(), files.end());
    std::vector<DeviceTrace> corpus;
    corpus.reserve(files.size());
    for (const auto& f : files) corpus.push_back(load_device_csv(f));
    return corpus;
}

}  // namespace netprint
