#pragma once

#include <cstdint>
#include <string>

#include "journeygen/transformer.hpp"

namespace jgen {

// Checkpoint file: magic + version, a JSON header carrying the config, the
// training step and the tokenizer hash, then named parameter blobs as
// little-endian float32 in for_each order. Loading validates every shape.
void save_checkpoint(const std::string& path, const TransformerParams<float>& params, long step,
                     std::uint64_t vocab_hash);

struct LoadedCheckpoint {
    TransformerParams<float> params;
    long step = 0;
    std::uint64_t vocab_hash = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace jgen
