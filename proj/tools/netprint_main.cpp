// netprint: one-class device fingerprinting over packet info strings.
//
// Subcommands: gen, train, fingerprint, scan, eval, gradcheck. Every run
// prints its resolved configuration so output artifacts are auditable and
// reproducible from the logged seed.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "netprint/error.hpp"
#include "netprint/matcher.hpp"
#include "netprint/rng.hpp"
#include "netprint/synthgen.hpp"
#include "netprint/tape.hpp"
#include "netprint/trainer.hpp"

namespace fs = std::filesystem;
using namespace netprint;

namespace {

struct GenOptions {
    std::string out_dir;
    int devices = 8;
    int lines = 400;
    double similarity = 0.6;
    std::uint64_t seed = 1;
};

struct TrainOptions {
    std::string corpus_dir;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    double ratio = 0.5;
    TrainerConfig cfg;
    double lr1 = -1.0;  // phase overrides; negative = keep the struct default
    double lr2 = -1.0;
};

struct FingerprintOptions {
    std::string weights_path;
    std::string target_csv;
    std::string out_path = "model.dnp";
    double tau = 0.5;
};

struct ScanOptions {
    std::string model_path;
    std::string stream_csv;
    std::string out_path;
};

struct EvalOptions {
    std::string corpus_dir;
    std::string weights_path;
    std::string out_dir = ".";
    double tau = 0.5;
};

struct GradcheckOptions {
    std::uint64_t seed = 7;
    int samples = 200;
    double step = 1e-5;
    double tol = 1e-4;
    int max_len = 96;
    int hidden = 16;
    int kernel = 5;
    int embed_dim = 32;
};

void print_header(const std::string& cmd,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cout << "netprint " << cmd << " configuration:\n";
    for (const auto& [k, v] : kv) std::cout << "  " << k << "=" << v << "\n";
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

int run_gen(const GenOptions& opt) {
    print_header("gen", {{"out", opt.out_dir},
                         {"devices", std::to_string(opt.devices)},
                         {"lines", std::to_string(opt.lines)},
                         {"similarity", fmt(opt.similarity)},
                         {"seed", std::to_string(opt.seed)}});
    const auto corpus = make_corpus(opt.devices, opt.lines, opt.similarity, opt.seed);
    write_corpus(corpus, opt.out_dir);
    std::cout << "wrote " << corpus.size() << " device traces to " << opt.out_dir << "\n";
    return 0;
}

void write_curve(const fs::path& path, const std::vector<double>& curve) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(17);
    for (double v : curve) out << v << "\n";
}

int run_train(const TrainOptions& opt) {
    TrainerConfig cfg = opt.cfg;
    cfg.split_ratio = opt.ratio;
    if (opt.lr1 > 0.0) cfg.phase1.adam.lr = opt.lr1;
    if (opt.lr2 > 0.0) cfg.phase2.adam.lr = opt.lr2;
    print_header("train",
                 {{"corpus", opt.corpus_dir},
                  {"out", opt.out_dir},
                  {"seed", std::to_string(opt.seed)},
                  {"ratio", fmt(opt.ratio)},
                  {"max_len", std::to_string(cfg.codec.max_len)},
                  {"hidden", std::to_string(cfg.lstm.hidden_channels)},
                  {"kernel", std::to_string(cfg.lstm.kernel)},
                  {"embed_dim", std::to_string(cfg.embed.embed_dim)},
                  {"embed_channels", std::to_string(cfg.embed.channels)},
                  {"embed_kernel", std::to_string(cfg.embed.kernel)},
                  {"epochs", std::to_string(cfg.phase1.epochs)},
                  {"batch_windows", std::to_string(cfg.phase1.batch_windows)},
                  {"window_stride", std::to_string(cfg.window_stride)},
                  {"pair_batches", std::to_string(cfg.phase2.batches)},
                  {"pair_batch_size", std::to_string(cfg.phase2.batch_size)},
                  {"pos_fraction", fmt(cfg.phase2.pos_fraction)},
                  {"offset_stride", std::to_string(cfg.phase2.offset_stride)},
                  {"lr1", fmt(cfg.phase1.adam.lr)},
                  {"lr2", fmt(cfg.phase2.adam.lr)}});

    const auto corpus = load_corpus_dir(opt.corpus_dir);
    std::cout << "loaded " << corpus.size() << " device traces\n";
    const TrainArtifacts art = train_two_phase(corpus, cfg, opt.seed);

    fs::create_directories(opt.out_dir);
    const fs::path out_dir(opt.out_dir);

    WeightsBundle bundle;
    bundle.codec = cfg.codec;
    bundle.lstm = cfg.lstm;
    bundle.embed = cfg.embed;
    bundle.theta = art.theta;
    bundle.phi = art.phi;
    bundle.seed = opt.seed;
    bundle.train_devices = art.split.train_devices;
    save_weights(bundle, out_dir / "weights.dnp");
    write_curve(out_dir / "phase1_loss.txt", art.phase1_curve);
    write_curve(out_dir / "phase2_loss.txt", art.phase2_curve);
    {
        std::ofstream split_out(out_dir / "split.txt");
        for (const auto& id : art.split.train_devices) split_out << "train " << id << "\n";
        for (const auto& id : art.split.held_out_devices) split_out << "held-out " << id << "\n";
    }

    std::cout << "phase 1: " << art.phase1_curve.size() << " steps, loss "
              << art.phase1_curve.front() << " -> " << art.phase1_curve.back() << "\n";
    std::cout << "phase 2: " << art.phase2_curve.size() << " steps, loss "
              << art.phase2_curve.front() << " -> " << art.phase2_curve.back() << "\n";
    std::cout << "wrote " << (out_dir / "weights.dnp").string() << "\n";
    return 0;
}

int run_fingerprint(const FingerprintOptions& opt) {
    print_header("fingerprint", {{"weights", opt.weights_path},
                                 {"target", opt.target_csv},
                                 {"out", opt.out_path},
                                 {"tau", fmt(opt.tau)}});
    const WeightsBundle bundle = load_weights(opt.weights_path);
    const FingerprintModel model =
        build_fingerprint(opt.target_csv, bundle.theta, bundle.phi, bundle.codec, bundle.lstm,
                          bundle.embed, opt.tau, bundle.seed);
    save_model(model, opt.out_path);
    std::cout << "fingerprint for '" << model.target_label << "' written to " << opt.out_path
              << "\n";
    return 0;
}

int run_scan(const ScanOptions& opt) {
    print_header("scan", {{"model", opt.model_path},
                          {"stream", opt.stream_csv},
                          {"out", opt.out_path.empty() ? "<stdout>" : opt.out_path}});
    const FingerprintModel model = load_model(opt.model_path);
    const ScanResult result = scan_stream(model, opt.stream_csv);
    if (opt.out_path.empty()) {
        write_scan_log(result, std::cout);
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw IoError("cannot write " + opt.out_path);
        write_scan_log(result, out);
        std::cout << "summary: " << result.flagged_count << "/" << result.total
                  << " flagged (rate " << std::fixed << std::setprecision(6)
                  << result.flag_rate() << ")\n";
    }
    return 0;
}

int run_eval(const EvalOptions& opt) {
    print_header("eval", {{"corpus", opt.corpus_dir},
                          {"weights", opt.weights_path},
                          {"out", opt.out_dir},
                          {"tau", fmt(opt.tau)}});
    const auto corpus = load_corpus_dir(opt.corpus_dir);
    const WeightsBundle bundle = load_weights(opt.weights_path);

    SplitSpec split;
    split.train_devices = bundle.train_devices;
    for (const auto& trace : corpus)
        if (!split.is_train(trace.device_id)) split.held_out_devices.push_back(trace.device_id);

    const EvalReport report = evaluate(corpus, split, bundle.theta, bundle.phi, bundle.codec,
                                       bundle.lstm, bundle.embed, opt.tau);

    fs::create_directories(opt.out_dir);
    {
        std::ofstream out(fs::path(opt.out_dir) / "report.txt");
        write_eval_table(report, out);
    }
    {
        std::ofstream out(fs::path(opt.out_dir) / "decisions.log");
        write_decision_log(report, out);
    }
    write_eval_table(report, std::cout);
    return 0;
}

int run_gradcheck(const GradcheckOptions& opt) {
    print_header("gradcheck", {{"seed", std::to_string(opt.seed)},
                               {"samples", std::to_string(opt.samples)},
                               {"step", fmt(opt.step)},
                               {"tol", fmt(opt.tol)},
                               {"max_len", std::to_string(opt.max_len)},
                               {"hidden", std::to_string(opt.hidden)},
                               {"kernel", std::to_string(opt.kernel)},
                               {"embed_dim", std::to_string(opt.embed_dim)}});

    CodecConfig codec;
    codec.max_len = opt.max_len;
    ConvLstmConfig lstm;
    lstm.hidden_channels = opt.hidden;
    lstm.kernel = opt.kernel;
    EmbedConfig embed_cfg;
    embed_cfg.embed_dim = opt.embed_dim;

    // Full composed pair-loss graph over a synthetic episode: packet text
    // through the codec, the encoder, the embedder, prototypes and the
    // episode loss, with gradients flowing into every encoder and embedder
    // parameter.
    const auto corpus = make_corpus(2, codec.window_len + 5, 0.5, opt.seed);
    Window support;
    support.label = corpus[0].device_id;
    for (int i = 0; i < codec.window_len; ++i)
        support.samples.push_back(encode_packet(corpus[0].lines[std::size_t(i)], codec));
    const PacketSample query =
        encode_packet(corpus[0].lines[std::size_t(codec.window_len)], codec);
    const Window null_win = null_window(codec);

    // the decoder plays no part in the pair loss; keep it out of the store
    ParamStore all;
    all.absorb(init_autoencoder_params(codec, lstm, Rng::derive(opt.seed, 1)));
    all.absorb(init_embedder_params(lstm, embed_cfg, Rng::derive(opt.seed, 2)));
    ParamStore params;
    params.rng_seed = opt.seed;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all.names()[i].rfind("dec.", 0) != 0) params.add(all.names()[i], all.value(i));

    const ScalarGraph graph = [&](ParamStore& ps, GradMap* grads) {
        Tape tape;
        const CellParamIds enc = bind_cell_params(tape, ps, "enc");
        const EmbedParamIds emb = bind_embedder_params(tape, ps);
        std::vector<NodeId> target_embs, null_embs;
        for (NodeId e : encode_on_tape(tape, support, enc, codec, lstm))
            target_embs.push_back(embed_on_tape(tape, e, emb));
        for (NodeId e : encode_on_tape(tape, null_win, enc, codec, lstm))
            null_embs.push_back(embed_on_tape(tape, e, emb));
        CellStateIds qstate{tape.constant(Tensor({codec.max_len, lstm.hidden_channels})),
                            tape.constant(Tensor({codec.max_len, lstm.hidden_channels}))};
        qstate = cell_step_onehot(tape, query.rows, qstate, enc);
        const NodeId query_emb = embed_on_tape(tape, qstate.h, emb);
        const NodeId loss =
            pair_loss_on_tape(tape, target_embs, null_embs, query_emb, PairKind::Positive);
        if (grads) {
            tape.backward(loss);
            *grads = tape.param_grads();
        }
        return tape.scalar(loss);
    };

    const GradCheckReport report = grad_check(graph, params, opt.step, opt.samples, opt.seed);
    std::cout << std::setprecision(6) << std::scientific;
    std::cout << "checked " << report.elements_checked << " parameter elements\n";
    std::cout << "max relative error " << report.max_rel_error << " (worst: "
              << report.worst_param << "[" << report.worst_index << "] tape=" << report.worst_tape
              << " fd=" << report.worst_fd << ")\n";
    if (!report.passed(opt.tol)) {
        std::cout << "FAIL: tolerance exceeded\n";
        return 1;
    }
    std::cout << "PASS: within tolerance\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-class network device fingerprinting"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic device corpus");
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
    gen_cmd->add_option("--devices", gen.devices, "number of devices");
    gen_cmd->add_option("--lines", gen.lines, "packets per device");
    gen_cmd->add_option("--similarity", gen.similarity, "inter-device similarity in [0,1]");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "two-phase training over a corpus directory");
    train_cmd->add_option("--corpus", train.corpus_dir, "corpus directory")->required();
    train_cmd->add_option("--out", train.out_dir, "output directory for weights and curves");
    train_cmd->add_option("--seed", train.seed, "training seed");
    train_cmd->add_option("--ratio", train.ratio, "train split ratio");
    train_cmd->add_option("--max-len", train.cfg.codec.max_len, "encoded string length");
    train_cmd->add_option("--hidden", train.cfg.lstm.hidden_channels, "encoder hidden channels");
    train_cmd->add_option("--kernel", train.cfg.lstm.kernel, "encoder kernel width");
    train_cmd->add_option("--embed-dim", train.cfg.embed.embed_dim, "metric space dimension");
    train_cmd->add_option("--embed-channels", train.cfg.embed.channels, "embedder channels");
    train_cmd->add_option("--embed-kernel", train.cfg.embed.kernel, "embedder kernel width");
    train_cmd->add_option("--epochs", train.cfg.phase1.epochs, "phase-1 epochs");
    train_cmd->add_option("--batch-windows", train.cfg.phase1.batch_windows, "phase-1 batch size");
    train_cmd->add_option("--window-stride", train.cfg.window_stride, "phase-1 window stride");
    train_cmd->add_option("--pair-batches", train.cfg.phase2.batches, "phase-2 batches");
    train_cmd->add_option("--pair-batch-size", train.cfg.phase2.batch_size, "pairs per batch");
    train_cmd->add_option("--pos-fraction", train.cfg.phase2.pos_fraction,
                          "positive fraction per batch");
    train_cmd->add_option("--offset-stride", train.cfg.phase2.offset_stride,
                          "support window offset grid");
    train_cmd->add_option("--lr1", train.lr1, "phase-1 Adam learning rate");
    train_cmd->add_option("--lr2", train.lr2, "phase-2 Adam learning rate");

    FingerprintOptions fp;
    auto* fp_cmd = app.add_subcommand("fingerprint", "build a fingerprint model from a trace");
    fp_cmd->add_option("--weights", fp.weights_path, "trained weights bundle")->required();
    fp_cmd->add_option("--target", fp.target_csv, "target device trace (csv)")->required();
    fp_cmd->add_option("--out", fp.out_path, "output model path");
    fp_cmd->add_option("--tau", fp.tau, "decision threshold");

    ScanOptions scan;
    auto* scan_cmd = app.add_subcommand("scan", "scan a packet stream against a fingerprint");
    scan_cmd->add_option("--model", scan.model_path, "fingerprint model file")->required();
    scan_cmd->add_option("--stream", scan.stream_csv, "stream file, one packet per line")
        ->required();
    scan_cmd->add_option("--out", scan.out_path, "scan log path (default stdout)");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "full identification protocol over a corpus");
    eval_cmd->add_option("--corpus", eval.corpus_dir, "corpus directory")->required();
    eval_cmd->add_option("--weights", eval.weights_path, "trained weights bundle")->required();
    eval_cmd->add_option("--out", eval.out_dir, "output directory for report and decision log");
    eval_cmd->add_option("--tau", eval.tau, "decision threshold");

    GradcheckOptions gc;
    auto* gc_cmd = app.add_subcommand(
        "gradcheck", "finite-difference check of the composed pair-loss graph");
    gc_cmd->add_option("--seed", gc.seed, "seed for parameters and sampled elements");
    gc_cmd->add_option("--samples", gc.samples, "minimum parameter elements to check");
    gc_cmd->add_option("--step", gc.step, "central difference step");
    gc_cmd->add_option("--tol", gc.tol, "maximum relative error");
    gc_cmd->add_option("--max-len", gc.max_len, "encoded string length");
    gc_cmd->add_option("--hidden", gc.hidden, "encoder hidden channels");
    gc_cmd->add_option("--kernel", gc.kernel, "encoder kernel width");
    gc_cmd->add_option("--embed-dim", gc.embed_dim, "metric space dimension");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) return run_gen(gen);
        if (train_cmd->parsed()) return run_train(train);
        if (fp_cmd->parsed()) return run_fingerprint(fp);
        if (scan_cmd->parsed()) return run_scan(scan);
        if (eval_cmd->parsed()) return run_eval(eval);
        if (gc_cmd->parsed()) return run_gradcheck(gc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
