#include "netprint/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_map>

#include "netprint/error.hpp"
#include "netprint/rng.hpp"

namespace netprint {

bool SplitSpec::is_train(const std::string& device_id) const {
    return std::find(train_devices.begin(), train_devices.end(), device_id) !=
           train_devices.end();
}

SplitSpec split_devices(const std::vector<DeviceTrace>& corpus, double ratio, std::uint64_t seed) {
    NP_REQUIRE(ratio >= 0.0 && ratio <= 1.0, "split ratio must be in [0,1]");
    std::vector<std::string> ids;
    ids.reserve(corpus.size());
    for (const auto& t : corpus) ids.push_back(t.device_id);
    std::sort(ids.begin(), ids.end());

    Rng rng(Rng::derive(seed, 0x5b1));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

    const std::size_t n_train =
        static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(ids.size())));
    SplitSpec split;
    split.train_devices.assign(ids.begin(), ids.begin() + std::min(n_train, ids.size()));
    split.held_out_devices.assign(ids.begin() + std::min(n_train, ids.size()), ids.end());
    std::sort(split.train_devices.begin(), split.train_devices.end());
    std::sort(split.held_out_devices.begin(), split.held_out_devices.end());
    return split;
}

PairBatch sample_pairs(const std::vector<DeviceTrace>& corpus, const SplitSpec& split,
                       int batch_size, double pos_fraction, std::uint64_t seed,
                       int offset_stride) {
    NP_REQUIRE(batch_size >= 1, "batch_size must be >= 1");
    NP_REQUIRE(pos_fraction >= 0.0 && pos_fraction <= 1.0, "pos_fraction must be in [0,1]");
    NP_REQUIRE(offset_stride >= 1, "offset_stride must be >= 1");

    CodecConfig codec;  // window length is fixed; alphabet defaults apply
    const int w = codec.window_len;

    // Usable training devices need a window plus at least one outside packet.
    std::vector<const DeviceTrace*> usable;
    for (const auto& trace : corpus)
        if (split.is_train(trace.device_id) && static_cast<int>(trace.lines.size()) >= w + 1)
            usable.push_back(&trace);
    NP_REQUIRE(usable.size() >= 2, "pair sampling needs at least 2 usable training devices");

    Rng rng(Rng::derive(seed, 0x9a1));
    const int n_pos = static_cast<int>(std::llround(pos_fraction * batch_size));

    auto draw_window = [&](const DeviceTrace& trace, int* offset_out) {
        const int max_offset = static_cast<int>(trace.lines.size()) - w;
        const int grid = max_offset / offset_stride + 1;
        const int offset = offset_stride * rng.below_int(grid);
        *offset_out = offset;
        Window win;
        win.label = trace.device_id;
        win.samples.reserve(std::size_t(w));
        for (int i = offset; i < offset + w; ++i)
            win.samples.push_back(encode_packet(trace.lines[std::size_t(i)], codec));
        return win;
    };

    PairBatch batch;
    batch.entries.reserve(std::size_t(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        PairEntry entry;
        entry.kind = i < n_pos ? PairKind::Positive : PairKind::Negative;

        const DeviceTrace& target = *usable[std::size_t(rng.below_int(int(usable.size())))];
        entry.window = draw_window(target, &entry.window_offset);
        entry.window_device = target.device_id;

        if (entry.kind == PairKind::Positive) {
            // Uniform over packets outside [offset, offset + w).
            const int n = static_cast<int>(target.lines.size());
            int q = rng.below_int(n - w);
            if (q >= entry.window_offset) q += w;
            entry.query_device = target.device_id;
            entry.query_index = q;
            entry.query = encode_packet(target.lines[std::size_t(q)], codec);
        } else {
            int other = rng.below_int(int(usable.size()) - 1);
            if (usable[std::size_t(other)] == &target) other = int(usable.size()) - 1;
            const DeviceTrace& source = *usable[std::size_t(other)];
            const int q = rng.below_int(int(source.lines.size()));
            entry.query_device = source.device_id;
            entry.query_index = q;
            entry.query = encode_packet(source.lines[std::size_t(q)], codec);
        }
        batch.entries.push_back(std::move(entry));
    }
    return batch;
}

namespace {

/// Lazy per-(device, offset) window encodings and per-(device, line) query
/// encodings against a frozen encoder.
class EncodingCache {
public:
    EncodingCache(const std::vector<DeviceTrace>& corpus, const ParamStore& theta,
                  const CodecConfig& codec, const ConvLstmConfig& lstm)
        : corpus_(corpus), theta_(theta), codec_(codec), lstm_(lstm) {
        for (std::size_t d = 0; d < corpus.size(); ++d) by_id_[corpus[d].device_id] = d;
    }

    const std::vector<Tensor>& window(const std::string& device, int offset) {
        const std::int64_t key = make_key(device, offset);
        auto it = windows_.find(key);
        if (it != windows_.end()) return it->second;
        const DeviceTrace& trace = corpus_[by_id_.at(device)];
        Window win;
        win.label = device;
        for (int i = offset; i < offset + codec_.window_len; ++i)
            win.samples.push_back(encode_packet(trace.lines[std::size_t(i)], codec_));
        return windows_.emplace(key, encode_window(win, theta_, codec_, lstm_)).first->second;
    }

    const Tensor& query(const std::string& device, int index) {
        const std::int64_t key = make_key(device, index);
        auto it = queries_.find(key);
        if (it != queries_.end()) return it->second;
        const DeviceTrace& trace = corpus_[by_id_.at(device)];
        const PacketSample sample = encode_packet(trace.lines[std::size_t(index)], codec_);
        return queries_.emplace(key, encode_single(sample, theta_, codec_, lstm_)).first->second;
    }

private:
    std::int64_t make_key(const std::string& device, int pos) const {
        return static_cast<std::int64_t>(by_id_.at(device)) << 32 | std::uint32_t(pos);
    }

    const std::vector<DeviceTrace>& corpus_;
    const ParamStore& theta_;
    CodecConfig codec_;
    ConvLstmConfig lstm_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::int64_t, std::vector<Tensor>> windows_;
    std::unordered_map<std::int64_t, Tensor> queries_;
};

}  // namespace

ParamStore train_phase2(const ParamStore& theta, const std::vector<DeviceTrace>& corpus,
                        const SplitSpec& split, const CodecConfig& codec,
                        const ConvLstmConfig& lstm, const EmbedConfig& embed_cfg,
                        const Phase2Hyper& hyper, std::uint64_t seed,
                        std::vector<double>* loss_curve) {
    ParamStore phi = init_embedder_params(lstm, embed_cfg, Rng::derive(seed, 0xf2));

    // The null-class support never changes while the encoder is frozen.
    const std::vector<Tensor> null_encodings =
        encode_window(null_window(codec), theta, codec, lstm);
    EncodingCache cache(corpus, theta, codec, lstm);

    Tape tape;
    for (int b = 0; b < hyper.batches; ++b) {
        const PairBatch batch = sample_pairs(corpus, split, hyper.batch_size, hyper.pos_fraction,
                                             Rng::derive(seed, 0x2000 + std::uint64_t(b)),
                                             hyper.offset_stride);
        tape.clear();
        const EmbedParamIds emb = bind_embedder_params(tape, phi);

        std::vector<NodeId> null_embs;
        null_embs.reserve(null_encodings.size());
        for (const Tensor& e : null_encodings)
            null_embs.push_back(embed_on_tape(tape, tape.constant(e), emb));

        std::vector<NodeId> losses;
        losses.reserve(batch.entries.size());
        for (const PairEntry& entry : batch.entries) {
            const std::vector<Tensor>& wenc =
                cache.window(entry.window_device, entry.window_offset);
            std::vector<NodeId> target_embs;
            target_embs.reserve(wenc.size());
            for (const Tensor& e : wenc)
                target_embs.push_back(embed_on_tape(tape, tape.constant(e), emb));
            const NodeId query_emb = embed_on_tape(
                tape, tape.constant(cache.query(entry.query_device, entry.query_index)), emb);
            losses.push_back(pair_loss_on_tape(tape, target_embs, null_embs, query_emb, entry.kind));
        }
        const NodeId batch_loss = tape.mean_n(losses);
        tape.backward(batch_loss);
        adam_step(phi, tape.param_grads(), hyper.adam);
        if (loss_curve) loss_curve->push_back(tape.scalar(batch_loss));
    }
    return phi;
}

TrainArtifacts train_two_phase(const std::vector<DeviceTrace>& corpus, const TrainerConfig& cfg,
                               std::uint64_t seed) {
    NP_REQUIRE(!corpus.empty(), "empty corpus");
    TrainArtifacts art;
    art.split = split_devices(corpus, cfg.split_ratio, seed);

    std::vector<Window> phase1_windows;
    for (const auto& trace : corpus) {
        if (!art.split.is_train(trace.device_id)) continue;
        auto wins = build_windows(trace, cfg.codec, cfg.window_stride);
        for (auto& w : wins) phase1_windows.push_back(std::move(w));
    }
    NP_REQUIRE(!phase1_windows.empty(), "no training windows; traces too short?");

    art.theta = train_autoencoder(phase1_windows, cfg.codec, cfg.lstm, cfg.phase1,
                                  Rng::derive(seed, 0xae1), &art.phase1_curve);
    art.phi = train_phase2(art.theta, corpus, art.split, cfg.codec, cfg.lstm, cfg.embed,
                           cfg.phase2, Rng::derive(seed, 0xae2), &art.phase2_curve);
    return art;
}

namespace {

void finalize_target(TargetEval& te) {
    te.query_accuracy = te.total ? double(te.correct) / double(te.total) : 0.0;
    te.tpr = (te.tp + te.fn) ? double(te.tp) / double(te.tp + te.fn) : 0.0;
    te.tnr = (te.tn + te.fp) ? double(te.tn) / double(te.tn + te.fp) : 0.0;
    te.balanced_accuracy = 0.5 * (te.tpr + te.tnr);
}

void finalize_report(EvalReport& report) {
    long correct = 0;
    double balanced_sum = 0.0, device_sum = 0.0;
    long evaluated = 0;
    long unseen_correct = 0, unseen_total = 0;
    double unseen_balanced_sum = 0.0;
    long unseen_evaluated = 0;
    for (auto& te : report.per_target) {
        if (te.skipped) continue;
        finalize_target(te);
        ++evaluated;
        correct += te.correct;
        report.total_queries += te.total;
        balanced_sum += te.balanced_accuracy;
        device_sum += te.device_accuracy;
        if (!te.seen) {
            ++unseen_evaluated;
            unseen_correct += te.correct;
            unseen_total += te.total;
            unseen_balanced_sum += te.balanced_accuracy;
        }
    }
    report.overall_query_accuracy =
        report.total_queries ? double(correct) / double(report.total_queries) : 0.0;
    report.overall_balanced = evaluated ? balanced_sum / double(evaluated) : 0.0;
    report.overall_device_accuracy = evaluated ? device_sum / double(evaluated) : 0.0;
    report.unseen_query_accuracy =
        unseen_total ? double(unseen_correct) / double(unseen_total) : 0.0;
    report.unseen_balanced = unseen_evaluated ? unseen_balanced_sum / double(unseen_evaluated) : 0.0;
}

}  // namespace

EvalReport evaluate(const std::vector<DeviceTrace>& corpus, const SplitSpec& split,
                    const ParamStore& theta, const ParamStore& phi, const CodecConfig& codec,
                    const ConvLstmConfig& lstm, const EmbedConfig& embed_cfg, double tau) {
    NP_REQUIRE(!corpus.empty(), "empty corpus");
    EvalReport report;
    for (const auto& trace : corpus) report.device_ids.push_back(trace.device_id);

    // Query embeddings are target-independent; compute each packet's once.
    std::vector<std::vector<Tensor>> query_embs(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        query_embs[d].reserve(corpus[d].lines.size());
        for (const auto& line : corpus[d].lines) {
            const Tensor enc =
                encode_single(encode_packet(line, codec), theta, codec, lstm);
            query_embs[d].push_back(embed(enc, phi, embed_cfg));
        }
    }

    // Null prototype: embedding image of the all-padding window.
    std::vector<Tensor> null_embs;
    for (const Tensor& e : encode_window(null_window(codec), theta, codec, lstm))
        null_embs.push_back(embed(e, phi, embed_cfg));
    const Prototype c_n = prototype(null_embs, ClassId::Null);

    for (std::size_t target = 0; target < corpus.size(); ++target) {
        TargetEval te;
        te.device_id = corpus[target].device_id;
        te.seen = split.is_train(te.device_id);
        if (static_cast<int>(corpus[target].lines.size()) < codec.window_len) {
            te.skipped = true;
            report.per_target.push_back(std::move(te));
            continue;
        }

        // Fingerprint = the device's first window_len packets.
        Window fp;
        fp.label = te.device_id;
        for (int i = 0; i < codec.window_len; ++i)
            fp.samples.push_back(encode_packet(corpus[target].lines[std::size_t(i)], codec));
        std::vector<Tensor> target_embs;
        for (const Tensor& e : encode_window(fp, theta, codec, lstm))
            target_embs.push_back(embed(e, phi, embed_cfg));
        const Prototype c_t = prototype(target_embs, ClassId::Target);

        long devices_correct = 0;
        for (std::size_t source = 0; source < corpus.size(); ++source) {
            long flagged_count = 0;
            for (std::size_t q = 0; q < query_embs[source].size(); ++q) {
                const Posterior post = posterior(query_embs[source][q], c_t, c_n);
                const bool flagged = post.p_target > tau;
                const bool truth = source == target;
                flagged_count += flagged ? 1 : 0;
                te.total += 1;
                if (flagged == truth) te.correct += 1;
                if (truth)
                    (flagged ? te.tp : te.fn) += 1;
                else
                    (flagged ? te.fp : te.tn) += 1;
                report.decisions.push_back(DecisionRecord{int(target), int(source), int(q),
                                                          post.p_target, flagged});
            }
            const bool majority = 2 * flagged_count > long(query_embs[source].size());
            if (majority == (source == target)) ++devices_correct;
        }
        te.device_accuracy = double(devices_correct) / double(corpus.size());
        report.per_target.push_back(std::move(te));
    }

    finalize_report(report);
    return report;
}

EvalReport recompute_from_decisions(const EvalReport& report, const SplitSpec& split,
                                    double tau) {
    EvalReport out;
    out.device_ids = report.device_ids;
    out.decisions = report.decisions;
    const std::size_t n = report.device_ids.size();
    out.per_target.resize(n);
    std::vector<std::vector<long>> flagged_per_source(n, std::vector<long>(n, 0));
    std::vector<std::vector<long>> total_per_source(n, std::vector<long>(n, 0));
    for (std::size_t t = 0; t < n; ++t) {
        out.per_target[t].device_id = report.device_ids[t];
        out.per_target[t].seen = split.is_train(report.device_ids[t]);
        out.per_target[t].skipped = true;
    }
    for (const auto& rec : out.decisions) {
        TargetEval& te = out.per_target[std::size_t(rec.target_idx)];
        te.skipped = false;
        const bool truth = rec.target_idx == rec.source_idx;
        const bool flagged = rec.p_target > tau;
        te.total += 1;
        if (flagged == truth) te.correct += 1;
        if (truth)
            (flagged ? te.tp : te.fn) += 1;
        else
            (flagged ? te.fp : te.tn) += 1;
        flagged_per_source[std::size_t(rec.target_idx)][std::size_t(rec.source_idx)] +=
            flagged ? 1 : 0;
        total_per_source[std::size_t(rec.target_idx)][std::size_t(rec.source_idx)] += 1;
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (out.per_target[t].skipped) continue;
        long devices_correct = 0;
        for (std::size_t s = 0; s < n; ++s) {
            const bool majority = 2 * flagged_per_source[t][s] > total_per_source[t][s];
            if (majority == (t == s)) ++devices_correct;
        }
        out.per_target[t].device_accuracy = double(devices_correct) / double(n);
    }
    finalize_report(out);
    return out;
}

void write_decision_log(const EvalReport& report, std::ostream& out) {
    out << "target_device,source_device,packet_index,p_target,decision\n";
    for (const auto& rec : report.decisions) {
        out << report.device_ids[std::size_t(rec.target_idx)] << ','
            << report.device_ids[std::size_t(rec.source_idx)] << ',' << rec.packet_index << ','
            << std::fixed << std::setprecision(6) << rec.p_target << ','
            << (rec.flagged ? "TARGET" : "NULL") << '\n';
    }
    out.flush();
}

void write_eval_table(const EvalReport& report, std::ostream& out) {
    out << std::left << std::setw(14) << "target" << std::setw(9) << "split" << std::right
        << std::setw(9) << "queries" << std::setw(11) << "query_acc" << std::setw(10) << "balanced"
        << std::setw(8) << "tpr" << std::setw(8) << "tnr" << std::setw(12) << "device_acc"
        << '\n';
    out << std::string(81, '-') << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& te : report.per_target) {
        out << std::left << std::setw(14) << te.device_id << std::setw(9)
            << (te.seen ? "train" : "held-out") << std::right;
        if (te.skipped) {
            out << "  skipped (trace shorter than one window)\n";
            continue;
        }
        out << std::setw(9) << te.total << std::setw(11) << te.query_accuracy << std::setw(10)
            << te.balanced_accuracy << std::setw(8) << te.tpr << std::setw(8) << te.tnr
            << std::setw(12) << te.device_accuracy << '\n';
    }
    out << std::string(81, '-') << '\n';
    out << std::left << std::setw(23) << "OVERALL" << std::right << std::setw(9)
        << report.total_queries << std::setw(11) << report.overall_query_accuracy << std::setw(10)
        << report.overall_balanced << std::setw(28) << report.overall_device_accuracy << '\n';
    out << std::left << std::setw(23) << "HELD-OUT TARGETS" << std::right << std::setw(20)
        << report.unseen_query_accuracy << std::setw(10) << report.unseen_balanced << '\n';
    out.flush();
}

}  // namespace netprint
