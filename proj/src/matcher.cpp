#include "netprint/matcher.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "netprint/error.hpp"

namespace netprint {

namespace {

constexpr char kMagic[4] = {'D', 'N', 'P', '1'};

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class ByteWriter {
public:
    void u32(std::uint32_t x) {
        for (int i = 0; i < 4; ++i) bytes.push_back(char((x >> (8 * i)) & 0xff));
    }
    void f64(double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        for (int i = 0; i < 8; ++i) bytes.push_back(char((bits >> (8 * i)) & 0xff));
    }
    void raw(const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        bytes.insert(bytes.end(), c, c + n);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    std::string bytes;
};

class ByteReader {
public:
    explicit ByteReader(std::string data) : data_(std::move(data)) {}

    std::size_t offset() const { return pos_; }
    bool exhausted() const { return pos_ == data_.size(); }

    void need(std::size_t n, const char* what) {
        if (pos_ + n > data_.size())
            throw FormatError(std::string("truncated model file while reading ") + what, pos_);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i)
            x |= std::uint32_t(static_cast<unsigned char>(data_[pos_ + std::size_t(i)])) << (8 * i);
        pos_ += 4;
        return x;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + std::size_t(i)]))
                    << (8 * i);
        pos_ += 8;
        double x;
        std::memcpy(&x, &bits, sizeof(x));
        return x;
    }
    std::string str(const char* what) {
        const std::uint32_t n = u32(what);
        need(n, what);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::string data_;
    std::size_t pos_ = 0;
};

void write_tensor(ByteWriter& w, const std::string& name, const Tensor& t) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double x : t.v) w.f64(x);
}

std::pair<std::string, Tensor> read_tensor(ByteReader& r) {
    std::string name = r.str("tensor name");
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank > 3) throw FormatError("tensor rank out of range: " + std::to_string(rank),
                                    r.offset());
    std::vector<int> shape;
    for (std::uint32_t i = 0; i < rank; ++i)
        shape.push_back(static_cast<int>(r.u32("tensor dims")));
    Tensor t(shape);
    for (auto& x : t.v) x = r.f64("tensor values");
    return {std::move(name), std::move(t)};
}

using Header = std::map<std::string, std::string>;

std::string header_get(const Header& h, const std::string& key, std::size_t offset) {
    auto it = h.find(key);
    if (it == h.end()) throw FormatError("missing header field: " + key, offset);
    return it->second;
}

struct Container {
    Header header;
    ParamStore theta, phi;
    std::vector<std::pair<std::string, Tensor>> extra;  // proto.* tensors
    std::size_t header_end = 0;
};

void write_container(const Header& header, const ParamStore& theta, const ParamStore& phi,
                     const std::vector<std::pair<std::string, Tensor>>& extra,
                     const std::filesystem::path& path) {
    ByteWriter body;
    std::string header_text;
    for (const auto& [k, v] : header) header_text += k + "=" + v + "\n";

    body.raw(kMagic, 4);
    body.str(header_text);
    body.u32(static_cast<std::uint32_t>(theta.size() + phi.size() + extra.size()));
    for (std::size_t i = 0; i < theta.size(); ++i)
        write_tensor(body, theta.names()[i], theta.value(i));
    for (std::size_t i = 0; i < phi.size(); ++i) write_tensor(body, phi.names()[i], phi.value(i));
    for (const auto& [name, t] : extra) write_tensor(body, name, t);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out.write(body.bytes.data(), static_cast<std::streamsize>(body.bytes.size()));
    if (!out) throw IoError("short write to model file: " + path.string());
}

Container read_container_impl(const std::filesystem::path& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    ByteReader r(data);

    r.need(4, "magic");
    if (std::memcmp(data.data(), kMagic, 4) != 0)
        throw FormatError("bad magic; not a DNP1 model file", 0);
    r.u32("magic");  // consume the four magic bytes

    Container c;
    const std::string header_text = r.str("header");
    c.header_end = r.offset();
    std::istringstream hs(header_text);
    std::string line;
    while (std::getline(hs, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("malformed header line: " + line, c.header_end);
        c.header[line.substr(0, eq)] = line.substr(eq + 1);
    }

    const std::string version = header_get(c.header, "version", c.header_end);
    if (version != "1")
        throw FormatError("unsupported model version tag: " + version, c.header_end);
    const std::string kind = header_get(c.header, "kind", c.header_end);
    if (kind != expected_kind)
        throw FormatError("expected a " + expected_kind + " file but found kind=" + kind,
                          c.header_end);

    const std::uint32_t count = r.u32("tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        auto [name, t] = read_tensor(r);
        if (name.rfind("enc.", 0) == 0 || name.rfind("dec.", 0) == 0)
            c.theta.add(name, std::move(t));
        else if (name.rfind("emb.", 0) == 0)
            c.phi.add(name, std::move(t));
        else
            c.extra.emplace_back(std::move(name), std::move(t));
    }
    if (!r.exhausted())
        throw FormatError("trailing bytes after last tensor", r.offset());
    return c;
}

Header common_header(const CodecConfig& codec, const ConvLstmConfig& lstm,
                     const EmbedConfig& embed_cfg, std::uint64_t seed) {
    Header h;
    h["version"] = "1";
    h["alphabet"] = std::to_string(codec.alphabet_size);
    h["max_len"] = std::to_string(codec.max_len);
    h["window"] = std::to_string(codec.window_len);
    h["hidden"] = std::to_string(lstm.hidden_channels);
    h["kernel"] = std::to_string(lstm.kernel);
    h["embed_dim"] = std::to_string(embed_cfg.embed_dim);
    h["embed_channels"] = std::to_string(embed_cfg.channels);
    h["embed_kernel"] = std::to_string(embed_cfg.kernel);
    h["seed"] = std::to_string(seed);
    return h;
}

int header_int(const Header& h, const std::string& key, std::size_t offset) {
    return std::stoi(header_get(h, key, offset));
}

void parse_common_header(const Container& c, CodecConfig* codec, ConvLstmConfig* lstm,
                         EmbedConfig* embed_cfg, std::uint64_t* seed) {
    codec->alphabet_size = header_int(c.header, "alphabet", c.header_end);
    codec->max_len = header_int(c.header, "max_len", c.header_end);
    codec->window_len = header_int(c.header, "window", c.header_end);
    lstm->hidden_channels = header_int(c.header, "hidden", c.header_end);
    lstm->kernel = header_int(c.header, "kernel", c.header_end);
    embed_cfg->embed_dim = header_int(c.header, "embed_dim", c.header_end);
    embed_cfg->channels = header_int(c.header, "embed_channels", c.header_end);
    embed_cfg->kernel = header_int(c.header, "embed_kernel", c.header_end);
    *seed = std::stoull(header_get(c.header, "seed", c.header_end));
}

}  // namespace

FingerprintModel build_fingerprint(const std::filesystem::path& target_csv,
                                   const ParamStore& theta, const ParamStore& phi,
                                   const CodecConfig& codec, const ConvLstmConfig& lstm,
                                   const EmbedConfig& embed_cfg, double tau, std::uint64_t seed) {
    const DeviceTrace trace = load_device_csv(target_csv);
    if (static_cast<int>(trace.lines.size()) < codec.window_len) {
        std::ostringstream os;
        os << "insufficient fingerprint material in " << target_csv.string() << ": trace has "
           << trace.lines.size() << " packets, need " << codec.window_len << " (short by "
           << (codec.window_len - static_cast<int>(trace.lines.size())) << ")";
        throw IoError(os.str());
    }

    FingerprintModel model;
    model.codec = codec;
    model.lstm = lstm;
    model.embed = embed_cfg;
    model.theta = theta;
    model.phi = phi;
    model.tau = tau;
    model.target_label = trace.device_id;
    model.seed = seed;

    Window fp;
    fp.label = trace.device_id;
    for (int i = 0; i < codec.window_len; ++i)
        fp.samples.push_back(encode_packet(trace.lines[std::size_t(i)], codec));
    std::vector<Tensor> target_embs;
    for (const Tensor& e : encode_window(fp, theta, codec, lstm))
        target_embs.push_back(embed(e, phi, embed_cfg));
    model.target_proto = prototype(target_embs, ClassId::Target);

    std::vector<Tensor> null_embs;
    for (const Tensor& e : encode_window(null_window(codec), theta, codec, lstm))
        null_embs.push_back(embed(e, phi, embed_cfg));
    model.null_proto = prototype(null_embs, ClassId::Null);
    return model;
}

ScanResult scan_lines(const FingerprintModel& model, const std::vector<std::string>& lines) {
    ScanResult result;
    result.records.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const PacketSample sample = encode_packet(normalize_string(lines[i]), model.codec);
        const Tensor enc = encode_single(sample, model.theta, model.codec, model.lstm);
        const Tensor q = embed(enc, model.phi, model.embed);
        const Posterior post = posterior(q, model.target_proto, model.null_proto);
        const bool flagged = post.p_target > model.tau;
        result.records.push_back(ScanRecord{static_cast<int>(i), post.p_target, flagged});
        result.total += 1;
        result.flagged_count += flagged ? 1 : 0;
    }
    return result;
}

ScanResult scan_stream(const FingerprintModel& model, const std::filesystem::path& stream_csv) {
    std::ifstream in(stream_csv);
    if (!in) throw IoError("cannot open stream file: " + stream_csv.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }
    return scan_lines(model, lines);
}

void write_scan_log(const ScanResult& result, std::ostream& out) {
    out << std::fixed << std::setprecision(6);
    for (const auto& rec : result.records)
        out << rec.index << ' ' << rec.p_target << ' ' << (rec.flagged ? "TARGET" : "NULL")
            << '\n';
    out << "summary: " << result.flagged_count << "/" << result.total << " flagged (rate "
        << result.flag_rate() << ")\n";
    out.flush();
}

void save_model(const FingerprintModel& model, const std::filesystem::path& path) {
    NP_REQUIRE(model.target_proto.support_count == model.codec.window_len &&
                   model.null_proto.support_count == model.codec.window_len,
               "prototype support counts must equal the window length");
    Header h = common_header(model.codec, model.lstm, model.embed, model.seed);
    h["kind"] = "fingerprint";
    h["tau"] = format_double(model.tau);
    h["target"] = model.target_label;
    std::vector<std::pair<std::string, Tensor>> extra;
    extra.emplace_back("proto.target", model.target_proto.vector);
    extra.emplace_back("proto.null", model.null_proto.vector);
    write_container(h, model.theta, model.phi, extra, path);
}

FingerprintModel load_model(const std::filesystem::path& path) {
    Container c = read_container_impl(path, "fingerprint");
    FingerprintModel model;
    parse_common_header(c, &model.codec, &model.lstm, &model.embed, &model.seed);
    model.tau = std::strtod(header_get(c.header, "tau", c.header_end).c_str(), nullptr);
    model.target_label = header_get(c.header, "target", c.header_end);
    model.theta = std::move(c.theta);
    model.phi = std::move(c.phi);
    model.theta.rng_seed = model.seed;
    model.phi.rng_seed = model.seed;

    bool have_target = false, have_null = false;
    for (auto& [name, t] : c.extra) {
        if (name == "proto.target") {
            model.target_proto = Prototype{std::move(t), ClassId::Target, model.codec.window_len};
            have_target = true;
        } else if (name == "proto.null") {
            model.null_proto = Prototype{std::move(t), ClassId::Null, model.codec.window_len};
            have_null = true;
        } else {
            throw FormatError("unexpected tensor in fingerprint file: " + name, c.header_end);
        }
    }
    if (!have_target || !have_null)
        throw FormatError("fingerprint file is missing prototype tensors", c.header_end);
    return model;
}

void save_weights(const WeightsBundle& bundle, const std::filesystem::path& path) {
    Header h = common_header(bundle.codec, bundle.lstm, bundle.embed, bundle.seed);
    h["kind"] = "weights";
    std::string joined;
    for (std::size_t i = 0; i < bundle.train_devices.size(); ++i) {
        if (i) joined += ",";
        joined += bundle.train_devices[i];
    }
    h["train_devices"] = joined;
    write_container(h, bundle.theta, bundle.phi, {}, path);
}

WeightsBundle load_weights(const std::filesystem::path& path) {
    Container c = read_container_impl(path, "weights");
    WeightsBundle bundle;
    parse_common_header(c, &bundle.codec, &bundle.lstm, &bundle.embed, &bundle.seed);
    bundle.theta = std::move(c.theta);
    bundle.phi = std::move(c.phi);
    bundle.theta.rng_seed = bundle.seed;
    bundle.phi.rng_seed = bundle.seed;
    const std::string joined = header_get(c.header, "train_devices", c.header_end);
    std::istringstream ss(joined);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) bundle.train_devices.push_back(item);
    if (!c.extra.empty())
        throw FormatError("unexpected tensor in weights file: " + c.extra.front().first,
                          c.header_end);
    return bundle;
}

}  // namespace netprint
