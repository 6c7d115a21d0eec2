#include "journeygen/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "journeygen/rng.hpp"

namespace jgen {

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::kTerminator: return "terminator";
        case StopReason::kEot: return "eot";
        case StopReason::kMaxTokens: return "max_tokens";
        case StopReason::kOverflow: return "overflow";
        case StopReason::kError: return "error";
    }
    return "unknown";
}

std::string make_prompt(const TextJourney& journey, int k) {
    if (k < 1) throw ConfigError("make_prompt: k must be >= 1");
    if (static_cast<int>(journey.codes.size()) < k)
        throw ConfigError("make_prompt: journey has " + std::to_string(journey.codes.size()) +
                          " points, need " + std::to_string(k));
    std::string full = journey_to_text(journey.codes, journey.events);
    // first k tokens of the serialized line, keeping the trailing separator:
    // merges cross spaces, so the prompt must end on a whole-token boundary
    // or the model would be continuing from a state it never trained on
    std::size_t pos = 0;
    for (int i = 0; i < k; ++i) pos = full.find(' ', pos) + 1;
    return full.substr(0, pos);
}

namespace {

int sample_from_logits(const Eigen::Matrix<float, 1, Eigen::Dynamic>& logits,
                       const SamplingConfig& cfg, Rng& rng) {
    const int V = static_cast<int>(logits.cols());
    Eigen::ArrayXf scaled = logits.row(0).transpose().array() / static_cast<float>(cfg.temperature);

    if (cfg.top_k > 0 && cfg.top_k < V) {
        std::vector<float> copy(scaled.data(), scaled.data() + V);
        std::nth_element(copy.begin(), copy.begin() + (cfg.top_k - 1), copy.end(),
                         std::greater<float>());
        const float cutoff = copy[cfg.top_k - 1];
        for (int i = 0; i < V; ++i)
            if (scaled[i] < cutoff) scaled[i] = -std::numeric_limits<float>::infinity();
    }

    const float mx = scaled.maxCoeff();
    Eigen::ArrayXd probs = (scaled - mx).cast<double>().exp();
    probs /= probs.sum();

    if (cfg.top_p < 1.0) {
        std::vector<int> idx(V);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            if (probs[a] != probs[b]) return probs[a] > probs[b];
            return a < b;
        });
        // smallest prefix with cumulative mass >= top_p
        double cum = 0.0;
        std::size_t keep = idx.size();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            cum += probs[idx[i]];
            if (cum >= cfg.top_p) {
                keep = i + 1;
                break;
            }
        }
        double kept_mass = 0.0;
        for (std::size_t i = 0; i < keep; ++i) kept_mass += probs[idx[i]];
        const double r = rng.uniform() * kept_mass;
        double cdf = 0.0;
        for (std::size_t i = 0; i < keep; ++i) {
            cdf += probs[idx[i]];
            if (r < cdf) return idx[i];
        }
        return idx[keep - 1];
    }

    const double r = rng.uniform();
    double cdf = 0.0;
    for (int i = 0; i < V; ++i) {
        cdf += probs[i];
        if (r < cdf) return i;
    }
    return V - 1;
}

}  // namespace

GenerationResult sample(const TransformerParams<float>& params, const BpeTokenizer& tok,
                        const std::string& prompt, const SamplingConfig& cfg) {
    cfg.validate();
    if (tok.vocab_size() > params.cfg.vocab_size)
        throw ConfigError("sample: model vocab smaller than tokenizer vocab");

    GenerationResult res;
    res.text = prompt;

    const std::vector<int> prompt_ids = tok.encode(prompt);
    if (prompt_ids.empty()) {
        res.stop = StopReason::kError;
        res.error = "empty prompt";
        return res;
    }
    if (static_cast<int>(prompt_ids.size()) + 1 >= params.cfg.ctx_len) {
        res.stop = StopReason::kOverflow;
        res.parsed = parse_journey_text(res.text);
        return res;
    }

    Rng rng(cfg.seed);
    DecodeState<float> st(params.cfg);
    Eigen::Matrix<float, 1, Eigen::Dynamic> logits;
    // journeys are separated by end-of-text in the training stream, so a
    // fresh journey is conditioned the same way here
    logits = decode_step(params, st, BpeTokenizer::kEot);
    for (int id : prompt_ids) logits = decode_step(params, st, id);

    res.stop = StopReason::kMaxTokens;
    for (int produced = 0; produced < cfg.max_new_tokens; ++produced) {
        const int next = sample_from_logits(logits, cfg, rng);
        if (next == BpeTokenizer::kEot) {
            res.stop = StopReason::kEot;
            break;
        }
        res.text += tok.expansion(next);
        if (res.text.size() >= 2 && res.text.compare(res.text.size() - 2, 2, " .") == 0) {
            res.stop = StopReason::kTerminator;
            break;
        }
        if (st.len >= params.cfg.ctx_len) {
            res.stop = StopReason::kOverflow;
            break;
        }
        logits = decode_step(params, st, next);
    }

    res.parsed = parse_journey_text(res.text);
    return res;
}

std::vector<GenerationResult> generate_batch(const TransformerParams<float>& params,
                                             const BpeTokenizer& tok,
                                             const std::vector<std::string>& prompts,
                                             const SamplingConfig& cfg) {
    cfg.validate();
    std::vector<GenerationResult> out(prompts.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(prompts.size()); ++i) {
        SamplingConfig item = cfg;
        item.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        try {
            out[i] = sample(params, tok, prompts[i], item);
        } catch (const std::exception& e) {
            out[i].stop = StopReason::kError;
            out[i].error = e.what();
        }
    }
    return out;
}

}  // namespace jgen
