#pragma once

#include <string>
#include <vector>

#include "journeygen/bpe.hpp"
#include "journeygen/journey_text.hpp"
#include "journeygen/transformer.hpp"

namespace jgen {

struct SamplingConfig {
    double temperature = 1.0;
    int top_k = 0;  // 0 = off
    double top_p = 0.95;
    int max_new_tokens = 512;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(temperature > 0.0)) throw ConfigError("sampling: temperature must be > 0");
        if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("sampling: top_p must be in (0, 1]");
        if (top_k < 0) throw ConfigError("sampling: top_k must be >= 0");
        if (max_new_tokens < 1) throw ConfigError("sampling: max_new_tokens must be >= 1");
    }
};

enum class StopReason { kTerminator, kEot, kMaxTokens, kOverflow, kError };

const char* stop_reason_name(StopReason r);

struct GenerationResult {
    std::string text;  // prompt + generated continuation
    StopReason stop = StopReason::kError;
    std::string error;
    JourneyParseResult parsed;  // verdict of the journey-text parser
};

// Serialization of the first k annotated points of a journey, no terminator.
// Ends with the token separator so generation continues on a token boundary.
std::string make_prompt(const TextJourney& journey, int k = 7);

// Autoregressive sampling from temperature/top-k/top-p filtered softmax until
// the text ends with the journey terminator " .", end-of-text is emitted, the
// token budget runs out, or the context window would overflow (the window is
// never truncated).
GenerationResult sample(const TransformerParams<float>& params, const BpeTokenizer& tok,
                        const std::string& prompt, const SamplingConfig& cfg);

// Independent per-prompt seeds derived from cfg.seed; output order matches
// the prompt order and per-item failures do not abort the batch.
std::vector<GenerationResult> generate_batch(const TransformerParams<float>& params,
                                             const BpeTokenizer& tok,
                                             const std::vector<std::string>& prompts,
                                             const SamplingConfig& cfg);

}  // namespace jgen
