#include "journeygen/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <numeric>

#include "journeygen/checkpoint.hpp"
#include "journeygen/io_util.hpp"

namespace jgen {

CorpusSplit make_corpus_split(const std::vector<std::string>& lines, const SplitSpec& spec) {
    if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    std::vector<std::size_t> idx(lines.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(spec.seed);
    rng.shuffle(idx);
    const std::size_t n = lines.size();
    const std::size_t n_train = static_cast<std::size_t>(std::llround(spec.train * n));
    const std::size_t n_val =
        std::min(n - n_train, static_cast<std::size_t>(std::llround(spec.val * n)));
    CorpusSplit out;
    for (std::size_t k = 0; k < n; ++k) {
        const std::string& line = lines[idx[k]];
        if (k < n_train)
            out.train.push_back(line);
        else if (k < n_train + n_val)
            out.val.push_back(line);
        else
            out.test.push_back(line);
    }
    return out;
}

PackedWindows pack_sequences(const std::vector<std::vector<int>>& journey_tokens, int ctx,
                             int eot_id) {
    if (ctx < 2) throw ConfigError("pack: ctx must be >= 2");
    std::vector<int> stream;
    for (const auto& j : journey_tokens) {
        stream.insert(stream.end(), j.begin(), j.end());
        stream.push_back(eot_id);
    }
    if (stream.empty()) throw ConfigError("pack: empty corpus");

    PackedWindows out;
    out.ctx = ctx;
    for (std::size_t off = 0; off < stream.size(); off += ctx) {
        const std::size_t len = std::min(static_cast<std::size_t>(ctx), stream.size() - off);
        std::vector<int> in(ctx, eot_id), tg(ctx, -1);
        for (std::size_t i = 0; i < len; ++i) in[i] = stream[off + i];
        for (std::size_t i = 0; i + 1 < len; ++i) {
            tg[i] = stream[off + i + 1];
            ++out.contributing;
        }
        out.inputs.push_back(std::move(in));
        out.targets.push_back(std::move(tg));
    }
    return out;
}

namespace {

std::vector<std::vector<int>> encode_lines(const std::vector<std::string>& lines,
                                           const BpeTokenizer& tok) {
    std::vector<std::vector<int>> out;
    out.reserve(lines.size());
    for (const std::string& l : lines) out.push_back(tok.encode(l));
    return out;
}

// weighted mean loss over all windows, batched, no gradients
double dataset_loss(const TransformerParams<float>& params, const PackedWindows& w,
                    int batch_size) {
    const int ctx = w.ctx;
    double total = 0.0;
    long positions = 0;
    for (std::size_t start = 0; start < w.inputs.size(); start += batch_size) {
        const int B = static_cast<int>(std::min(static_cast<std::size_t>(batch_size),
                                                w.inputs.size() - start));
        std::vector<int> toks, tgts;
        toks.reserve(static_cast<std::size_t>(B) * ctx);
        tgts.reserve(static_cast<std::size_t>(B) * ctx);
        long contrib = 0;
        for (int b = 0; b < B; ++b) {
            const auto& in = w.inputs[start + b];
            const auto& tg = w.targets[start + b];
            toks.insert(toks.end(), in.begin(), in.end());
            tgts.insert(tgts.end(), tg.begin(), tg.end());
            contrib += std::count_if(tg.begin(), tg.end(), [](int t) { return t >= 0; });
        }
        if (contrib == 0) continue;
        const MatX<float> logits = transformer_forward(params, toks, B, ctx, nullptr);
        const float loss = cross_entropy<float>(logits, tgts, nullptr);
        total += static_cast<double>(loss) * contrib;
        positions += contrib;
    }
    return positions > 0 ? total / positions : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double evaluate_loss(const TransformerParams<float>& params, const std::vector<std::string>& lines,
                     const BpeTokenizer& tok, int batch_size) {
    const PackedWindows w =
        pack_sequences(encode_lines(lines, tok), params.cfg.ctx_len, BpeTokenizer::kEot);
    return dataset_loss(params, w, batch_size);
}

TrainResult train_model(TransformerParams<float> params,
                        const std::vector<std::string>& train_lines,
                        const std::vector<std::string>& val_lines, const BpeTokenizer& tok,
                        const TrainOptions& opts, const std::string& checkpoint_path) {
    if (train_lines.empty()) throw ConfigError("train: empty training set");
    if (tok.vocab_size() > params.cfg.vocab_size)
        throw ConfigError("train: model vocab smaller than tokenizer vocab");

    const int ctx = params.cfg.ctx_len;
    const std::vector<std::vector<int>> train_tokens = encode_lines(train_lines, tok);
    PackedWindows val_w;
    if (!val_lines.empty())
        val_w = pack_sequences(encode_lines(val_lines, tok), ctx, BpeTokenizer::kEot);

    TrainResult result;
    TrainRun& run = result.run;
    run.config = params.cfg;
    run.tokenizer_hash = tok.hash();
    run.epochs = opts.epochs;
    run.batch_size = opts.batch_size;
    run.checkpoint_path = checkpoint_path;

    AdamState<float> adam = AdamState<float>::shaped(params.cfg);
    TransformerParams<float> grads = TransformerParams<float>::shaped(params.cfg);
    ForwardCache<float> cache;

    TransformerParams<float> best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    bool have_checkpoint = false;

    std::vector<std::size_t> journey_order(train_tokens.size());
    std::iota(journey_order.begin(), journey_order.end(), 0);

    long steps = 0;
    bool stop = false;
    for (int epoch = 0; epoch < opts.epochs && !stop; ++epoch) {
        // re-pack every epoch with a fresh journey order: journeys must not be
        // pinned to fixed window positions or the learned position embeddings
        // memorize position-conditioned content and generation degrades
        Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(journey_order);
        std::vector<std::vector<int>> permuted;
        permuted.reserve(train_tokens.size());
        for (std::size_t j : journey_order) permuted.push_back(train_tokens[j]);
        const PackedWindows train_w = pack_sequences(permuted, ctx, BpeTokenizer::kEot);
        std::vector<std::size_t> order(train_w.inputs.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);

        double epoch_total = 0.0;
        long epoch_positions = 0;
        for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
            if (opts.max_steps > 0 && steps >= opts.max_steps) {
                stop = true;
                break;
            }
            const int B = static_cast<int>(std::min(static_cast<std::size_t>(opts.batch_size),
                                                    order.size() - start));
            std::vector<int> toks, tgts;
            toks.reserve(static_cast<std::size_t>(B) * ctx);
            tgts.reserve(static_cast<std::size_t>(B) * ctx);
            long contrib = 0;
            for (int b = 0; b < B; ++b) {
                const auto& in = train_w.inputs[order[start + b]];
                const auto& tg = train_w.targets[order[start + b]];
                toks.insert(toks.end(), in.begin(), in.end());
                tgts.insert(tgts.end(), tg.begin(), tg.end());
                contrib += std::count_if(tg.begin(), tg.end(), [](int t) { return t >= 0; });
            }
            if (contrib == 0) continue;

            const MatX<float> logits = transformer_forward(params, toks, B, ctx, &cache);
            MatX<float> dlogits;
            const float loss = cross_entropy<float>(logits, tgts, &dlogits);
            if (!std::isfinite(loss))
                throw TrainingDivergenceError(
                    "training loss non-finite at step " + std::to_string(steps + 1) +
                    (have_checkpoint ? "; last good checkpoint: " + checkpoint_path : ""));
            transformer_backward(params, cache, dlogits, grads);
            adam_step(params, grads, adam, opts.adam);
            ++steps;
            epoch_total += static_cast<double>(loss) * contrib;
            epoch_positions += contrib;
        }
        if (epoch_positions > 0) run.train_loss.push_back(epoch_total / epoch_positions);

        if (!val_lines.empty()) {
            const double vl = dataset_loss(params, val_w, opts.batch_size);
            run.val_loss.push_back(vl);
            if (!std::isfinite(vl))
                throw TrainingDivergenceError(
                    "validation loss non-finite after epoch " + std::to_string(epoch + 1) +
                    (have_checkpoint ? "; last good checkpoint: " + checkpoint_path : ""));
            if (vl < best_val) {
                best_val = vl;
                best_epoch = epoch;
                best = params;
                if (!checkpoint_path.empty()) {
                    save_checkpoint(checkpoint_path, best, steps, tok.hash());
                    have_checkpoint = true;
                }
            }
            if (opts.verbose)
                std::fprintf(stderr, "epoch %d/%d  train %.4f  val %.4f  steps %ld\n", epoch + 1,
                             opts.epochs, run.train_loss.back(), vl, steps);
        } else if (opts.verbose && !run.train_loss.empty()) {
            std::fprintf(stderr, "epoch %d/%d  train %.4f  steps %ld\n", epoch + 1, opts.epochs,
                         run.train_loss.back(), steps);
        }
    }

    run.steps = steps;
    if (val_lines.empty()) {
        // no validation: final weights are the result
        best = params;
        best_epoch = opts.epochs - 1;
        best_val = run.train_loss.empty() ? 0.0 : run.train_loss.back();
        if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, best, steps, tok.hash());
    }
    run.best_epoch = best_epoch;
    run.best_val = best_val;
    result.params = std::move(best);
    return result;
}

TrainResult pretrain(const TransformerConfig& config, const std::vector<std::string>& train_lines,
                     const std::vector<std::string>& val_lines, const BpeTokenizer& tok,
                     const TrainOptions& opts, const std::string& checkpoint_path) {
    return train_model(TransformerParams<float>::init(config), train_lines, val_lines, tok, opts,
                       checkpoint_path);
}

TrainResult finetune(const TransformerParams<float>& pretrained,
                     const std::vector<std::string>& train_lines_b, int n_samples,
                     const std::vector<std::string>& val_lines_b, const BpeTokenizer& tok,
                     const TrainOptions& opts, const std::string& checkpoint_path) {
    if (n_samples < 1) throw ConfigError("finetune: n_samples must be >= 1");
    if (n_samples > static_cast<int>(train_lines_b.size()))
        throw ConfigError("finetune: n_samples exceeds train split of " +
                          std::to_string(train_lines_b.size()));
    const std::vector<std::string> subset(train_lines_b.begin(),
                                          train_lines_b.begin() + n_samples);
    return train_model(pretrained, subset, val_lines_b, tok, opts, checkpoint_path);
}

std::vector<CurvePoint> learning_curve(const TransformerParams<float>& pretrained,
                                       const TransformerConfig& scratch_config,
                                       const CorpusSplit& corpus_b, const BpeTokenizer& tok,
                                       const std::vector<int>& sizes,
                                       const TrainOptions& finetune_opts,
                                       const TrainOptions& scratch_opts,
                                       const CurveCallback& on_run) {
    std::vector<CurvePoint> out;
    for (int size : sizes) {
        for (const char* mode : {"finetune", "scratch"}) {
            const bool ft = std::string(mode) == "finetune";
            TrainOptions opts = ft ? finetune_opts : scratch_opts;
            opts.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(size) * 2 + (ft ? 0 : 1));
            TrainResult res;
            if (ft) {
                res = finetune(pretrained, corpus_b.train, size, corpus_b.val, tok, opts, "");
            } else {
                TransformerConfig cfg = scratch_config;
                cfg.seed = derive_seed(opts.seed, 0xabcdu);
                res = finetune(TransformerParams<float>::init(cfg), corpus_b.train, size,
                               corpus_b.val, tok, opts, "");
            }
            CurvePoint pt{size, mode, res.run.best_val};
            if (on_run) on_run(pt, res.params);
            out.push_back(pt);
        }
    }
    return out;
}

std::string curve_to_csv(const std::vector<CurvePoint>& points) {
    std::string out = "size,mode,val_loss\n";
    char buf[64];
    for (const CurvePoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.6f\n", p.size, p.mode.c_str(), p.val_loss);
        out += buf;
    }
    return out;
}

std::string train_run_to_json(const TrainRun& run) {
    nlohmann::json j;
    j["config"] = {{"n_layer", run.config.n_layer},     {"n_head", run.config.n_head},
                   {"d_model", run.config.d_model},     {"d_ff", run.config.ff_dim()},
                   {"ctx_len", run.config.ctx_len},     {"vocab_size", run.config.vocab_size},
                   {"seed", run.config.seed}};
    j["tokenizer_hash"] = hex64(run.tokenizer_hash);
    j["epochs"] = run.epochs;
    j["batch_size"] = run.batch_size;
    j["steps"] = run.steps;
    j["train_loss"] = run.train_loss;
    j["val_loss"] = run.val_loss;
    j["best_epoch"] = run.best_epoch;
    j["best_val"] = run.best_val;
    j["checkpoint"] = run.checkpoint_path;
    return j.dump(2) + "\n";
}

}  // namespace jgen
