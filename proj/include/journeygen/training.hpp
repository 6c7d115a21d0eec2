#pragma once

#include <functional>
#include <string>
#include <vector>

#include "journeygen/adam.hpp"
#include "journeygen/bpe.hpp"
#include "journeygen/transformer.hpp"

namespace jgen {

struct SplitSpec {
    double train = 0.64;
    double val = 0.16;
    double test = 0.20;
    std::uint64_t seed = 0;
};

struct CorpusSplit {
    std::vector<std::string> train, val, test;
};

// Deterministic shuffle + partition; every journey lands in exactly one split.
CorpusSplit make_corpus_split(const std::vector<std::string>& lines, const SplitSpec& spec);

// Token windows for training: journeys joined by end-of-text, cut into
// ctx-length windows, the final partial window padded and masked from loss.
// targets[w][i] is the next token for inputs[w][i], or -1 when masked (the
// last position of each window and every padded position).
struct PackedWindows {
    int ctx = 0;
    std::vector<std::vector<int>> inputs;
    std::vector<std::vector<int>> targets;
    long contributing = 0;  // unmasked target count
};

PackedWindows pack_sequences(const std::vector<std::vector<int>>& journey_tokens, int ctx,
                             int eot_id);

struct TrainOptions {
    int epochs = 10;
    int batch_size = 16;
    long max_steps = 0;  // 0 = no cap
    AdamConfig adam;
    std::uint64_t seed = 0;
    bool verbose = false;
};

struct TrainRun {
    TransformerConfig config;
    std::uint64_t tokenizer_hash = 0;
    int epochs = 0;
    int batch_size = 0;
    long steps = 0;
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch (empty if no validation set)
    int best_epoch = -1;
    double best_val = 0.0;
    std::string checkpoint_path;
};

struct TrainResult {
    TrainRun run;
    TransformerParams<float> params;  // best-validation weights (final if no val set)
};

// Adam training from the given initial weights; optimizer state starts fresh.
// The best-validation weights are kept and checkpointed (checkpoint_path may
// be empty to skip file output). Divergence aborts with the last good
// checkpoint still on disk and TrainingDivergenceError raised.
TrainResult train_model(TransformerParams<float> init_params,
                        const std::vector<std::string>& train_lines,
                        const std::vector<std::string>& val_lines, const BpeTokenizer& tok,
                        const TrainOptions& opts, const std::string& checkpoint_path);

// From-scratch pretraining (weights initialized from config).
TrainResult pretrain(const TransformerConfig& config, const std::vector<std::string>& train_lines,
                     const std::vector<std::string>& val_lines, const BpeTokenizer& tok,
                     const TrainOptions& opts, const std::string& checkpoint_path);

// Continues from pretrained weights on the first n_samples journeys of the
// other store's train split, with fresh optimizer state.
TrainResult finetune(const TransformerParams<float>& pretrained,
                     const std::vector<std::string>& train_lines_b, int n_samples,
                     const std::vector<std::string>& val_lines_b, const BpeTokenizer& tok,
                     const TrainOptions& opts, const std::string& checkpoint_path);

// Mean validation cross-entropy of fixed weights over a line set.
double evaluate_loss(const TransformerParams<float>& params, const std::vector<std::string>& lines,
                     const BpeTokenizer& tok, int batch_size = 16);

struct CurvePoint {
    int size = 0;
    std::string mode;  // "finetune" | "scratch"
    double val_loss = 0.0;
};

using CurveCallback = std::function<void(const CurvePoint&, const TransformerParams<float>&)>;

// One independent run per (size, mode) with derived seeds; reports the kept
// (best-validation) loss per run. on_run, when given, receives each trained
// model (used to chain generation experiments without re-reading checkpoints).
std::vector<CurvePoint> learning_curve(const TransformerParams<float>& pretrained,
                                       const TransformerConfig& scratch_config,
                                       const CorpusSplit& corpus_b, const BpeTokenizer& tok,
                                       const std::vector<int>& sizes,
                                       const TrainOptions& finetune_opts,
                                       const TrainOptions& scratch_opts,
                                       const CurveCallback& on_run = nullptr);

std::string curve_to_csv(const std::vector<CurvePoint>& points);

std::string train_run_to_json(const TrainRun& run);

}  // namespace jgen
