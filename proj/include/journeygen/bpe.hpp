#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace jgen {

// Byte-level BPE. Base vocabulary is the 256 byte values plus one reserved
// end-of-text token; merges apply to raw bytes in training order. The text is
// pre-split at space boundaries (each space sticks to the chunk it ends), so
// merges never span a separator and any space-aligned prefix of a string
// tokenizes identically to the full string.
class BpeTokenizer {
   public:
    static constexpr int kEot = 256;
    static constexpr int kBaseVocab = 257;

    BpeTokenizer() = default;

    // Greedy highest-frequency adjacent-pair merging until target_vocab is
    // reached or no pair occurs at least twice. Frequency ties break toward
    // the lexicographically smallest (byte order) pair of expansions.
    static BpeTokenizer train(const std::vector<std::string>& lines, int target_vocab);

    std::vector<int> encode(const std::string& text) const;
    std::string decode(const std::vector<int>& ids) const;

    // byte expansion of one token (empty string for the end-of-text token)
    const std::string& expansion(int id) const;

    int vocab_size() const { return kBaseVocab + static_cast<int>(merges_.size()); }
    int target_vocab() const { return target_vocab_; }
    const std::vector<std::pair<int, int>>& merges() const { return merges_; }

    // Versioned text format; reloadable bit-exact.
    std::string serialize() const;
    static BpeTokenizer deserialize(const std::string& text);
    void save(const std::string& path) const;
    static BpeTokenizer load(const std::string& path);

    std::uint64_t hash() const;

   private:
    int target_vocab_ = kBaseVocab;
    std::vector<std::pair<int, int>> merges_;
    std::vector<std::string> expansions_;  // for all ids, including base

    void rebuild_expansions();
};

}  // namespace jgen
