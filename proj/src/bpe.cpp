#include "journeygen/bpe.hpp"

#include <sstream>
#include <unordered_map>

#include "journeygen/errors.hpp"
#include "journeygen/io_util.hpp"

namespace jgen {

namespace {

inline std::uint64_t pair_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

// one left-to-right pass replacing (a, b) with id
void apply_merge(std::vector<int>& seq, int a, int b, int id) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < seq.size(); ++r) {
        if (r + 1 < seq.size() && seq[r] == a && seq[r + 1] == b) {
            seq[w++] = id;
            ++r;
        } else {
            seq[w++] = seq[r];
        }
    }
    seq.resize(w);
}

// Split into chunks at space boundaries, each space attached to the chunk it
// terminates. Merges never cross chunk boundaries, so text cut at a space
// re-tokenizes exactly like the full string - prompts stay aligned with the
// training tokenization.
std::vector<std::vector<int>> split_chunks(const std::string& text) {
    std::vector<std::vector<int>> chunks;
    std::vector<int> cur;
    for (unsigned char c : text) {
        cur.push_back(c);
        if (c == ' ') {
            chunks.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) chunks.push_back(std::move(cur));
    return chunks;
}

}  // namespace

void BpeTokenizer::rebuild_expansions() {
    expansions_.clear();
    expansions_.reserve(kBaseVocab + merges_.size());
    for (int b = 0; b < 256; ++b) expansions_.push_back(std::string(1, static_cast<char>(b)));
    expansions_.push_back("");  // end-of-text
    for (const auto& [a, b] : merges_) expansions_.push_back(expansions_[a] + expansions_[b]);
}

BpeTokenizer BpeTokenizer::train(const std::vector<std::string>& lines, int target_vocab) {
    if (target_vocab <= kBaseVocab)
        throw ConfigError("bpe: target vocab must exceed base vocabulary of " +
                          std::to_string(kBaseVocab));
    BpeTokenizer model;
    model.target_vocab_ = target_vocab;
    model.rebuild_expansions();

    std::vector<std::vector<int>> seqs;
    for (const std::string& line : lines)
        for (std::vector<int>& chunk : split_chunks(line)) seqs.push_back(std::move(chunk));

    while (model.vocab_size() < target_vocab) {
        std::unordered_map<std::uint64_t, long> counts;
        for (const std::vector<int>& s : seqs)
            for (std::size_t i = 0; i + 1 < s.size(); ++i) ++counts[pair_key(s[i], s[i + 1])];

        // best = highest count, then lexicographically smallest expansions,
        // then smallest id pair (two ids can share an expansion)
        bool have = false;
        long best_count = 0;
        int best_a = 0, best_b = 0;
        for (const auto& [key, cnt] : counts) {
            if (cnt < 2) continue;
            const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffff);
            if (!have) {
                have = true;
            } else if (cnt != best_count) {
                if (cnt < best_count) continue;
            } else {
                const auto lhs = std::tie(model.expansions_[a], model.expansions_[b]);
                const auto rhs = std::tie(model.expansions_[best_a], model.expansions_[best_b]);
                if (lhs > rhs) continue;
                if (lhs == rhs && std::make_pair(a, b) > std::make_pair(best_a, best_b)) continue;
            }
            best_count = cnt;
            best_a = a;
            best_b = b;
        }
        if (!have) break;

        const int id = model.vocab_size();
        for (std::vector<int>& s : seqs) apply_merge(s, best_a, best_b, id);
        model.merges_.emplace_back(best_a, best_b);
        model.expansions_.push_back(model.expansions_[best_a] + model.expansions_[best_b]);
    }
    return model;
}

std::vector<int> BpeTokenizer::encode(const std::string& text) const {
    std::vector<int> out;
    out.reserve(text.size());
    for (std::vector<int>& seq : split_chunks(text)) {
        for (std::size_t m = 0; m < merges_.size(); ++m)
            apply_merge(seq, merges_[m].first, merges_[m].second,
                        kBaseVocab + static_cast<int>(m));
        out.insert(out.end(), seq.begin(), seq.end());
    }
    return out;
}

std::string BpeTokenizer::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) out += expansion(id);
    return out;
}

const std::string& BpeTokenizer::expansion(int id) const {
    if (id < 0 || id >= static_cast<int>(expansions_.size()))
        throw DataFormatError("bpe: unknown token id " + std::to_string(id));
    return expansions_[id];
}

std::string BpeTokenizer::serialize() const {
    std::ostringstream out;
    out << "journeygen-bbpe v1\n";
    out << "target_vocab " << target_vocab_ << "\n";
    for (const auto& [a, b] : merges_) out << "merge " << a << " " << b << "\n";
    return out.str();
}

BpeTokenizer BpeTokenizer::deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "journeygen-bbpe v1")
        throw DataFormatError("bpe: unrecognized tokenizer file header");
    BpeTokenizer model;
    std::string word;
    if (!(in >> word >> model.target_vocab_) || word != "target_vocab")
        throw DataFormatError("bpe: missing target_vocab");
    int a = 0, b = 0;
    while (in >> word >> a >> b) {
        if (word != "merge") throw DataFormatError("bpe: unexpected record \"" + word + "\"");
        const int next_id = kBaseVocab + static_cast<int>(model.merges_.size());
        if (a < 0 || b < 0 || a >= next_id || b >= next_id)
            throw DataFormatError("bpe: merge references unknown token id");
        model.merges_.emplace_back(a, b);
    }
    model.rebuild_expansions();
    return model;
}

void BpeTokenizer::save(const std::string& path) const { atomic_write_file(path, serialize()); }

BpeTokenizer BpeTokenizer::load(const std::string& path) {
    return deserialize(read_file(path));
}

std::uint64_t BpeTokenizer::hash() const { return fnv1a64(serialize()); }

}  // namespace jgen
