#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <journeygen/bpe.hpp>
#include <journeygen/journey_text.hpp>
#include <journeygen/rng.hpp>
#include <journeygen/spatial_codec.hpp>
#include <map>
#include <string>

using namespace jgen;

TEST_CASE("first merge on a repeated-letter corpus") {
    const BpeTokenizer model = BpeTokenizer::train({"aaaa"}, 300);
    REQUIRE_FALSE(model.merges().empty());
    CHECK(model.merges()[0] == std::pair<int, int>{'a', 'a'});
    // "aaaa" -> [aa][aa]
    CHECK(model.encode("aaaa") == std::vector<int>{257, 257});
}

TEST_CASE("single-character corpus learns no merges") {
    const BpeTokenizer model = BpeTokenizer::train({"x"}, 300);
    CHECK(model.merges().empty());
    CHECK(model.vocab_size() == 257);
}

TEST_CASE("empty corpus keeps the base vocabulary") {
    const BpeTokenizer model = BpeTokenizer::train({}, 512);
    CHECK(model.vocab_size() == 257);
}

TEST_CASE("encode of an unmerged byte is its base id") {
    const BpeTokenizer model = BpeTokenizer::train({"aaaa"}, 258);
    CHECK(model.encode("z") == std::vector<int>{'z'});
    CHECK(model.encode("").empty());
}

TEST_CASE("decode rejects unknown ids") {
    const BpeTokenizer model = BpeTokenizer::train({"aaaa"}, 258);
    CHECK_THROWS(static_cast<void>(model.decode({9999})));
    CHECK(model.decode({BpeTokenizer::kEot}) == "");
}

TEST_CASE("lossless on arbitrary byte strings") {
    const BpeTokenizer model = BpeTokenizer::train({"abcabc abc", "the cat sat"}, 300);
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::string s;
        const int n = static_cast<int>(rng.uniform_index(64));
        for (int k = 0; k < n; ++k) s.push_back(static_cast<char>(rng.uniform_index(256)));
        CHECK(model.decode(model.encode(s)) == s);
    }
}

namespace {

std::vector<std::string> journey_corpus(int n_lines, std::uint64_t seed) {
    const SpatialCodec codec;
    Rng rng(seed);
    std::vector<std::string> lines;
    for (int j = 0; j < n_lines; ++j) {
        std::vector<std::string> codes;
        int i = static_cast<int>(rng.uniform_index(60));
        int jj = static_cast<int>(rng.uniform_index(60));
        const int len = 10 + static_cast<int>(rng.uniform_index(30));
        std::vector<PurchaseEvent> events;
        for (int k = 0; k < len; ++k) {
            codes.push_back(codec.encode_cell({i, jj}));
            if (rng.uniform() < 0.5) i = std::min(63, i + 1);
            if (rng.uniform() < 0.3) jj = std::min(63, jj + 1);
            if (rng.uniform() < 0.08) events.push_back({k, 1 + (int)rng.uniform_index(3)});
        }
        lines.push_back(journey_to_text(codes, events));
    }
    return lines;
}

}  // namespace

TEST_CASE("journey corpus: frequent codes merge into single tokens") {
    const std::vector<std::string> lines = journey_corpus(1000, 11);
    const BpeTokenizer model = BpeTokenizer::train(lines, 512);
    CHECK(model.vocab_size() == 512);

    // independent pair-count check of the very first merge decision; pairs
    // never span a chunk boundary (a space ends its chunk)
    std::map<std::pair<int, int>, long> counts;
    for (const std::string& l : lines)
        for (std::size_t k = 0; k + 1 < l.size(); ++k) {
            if (l[k] == ' ') continue;
            ++counts[{static_cast<unsigned char>(l[k]), static_cast<unsigned char>(l[k + 1])}];
        }
    long best = 0;
    for (const auto& [p, c] : counts) best = std::max(best, c);
    CHECK(counts[model.merges()[0]] == best);

    // some token should have grown to cover a whole 6-char code (plus space)
    std::size_t longest = 0;
    for (int id = BpeTokenizer::kBaseVocab; id < model.vocab_size(); ++id)
        longest = std::max(longest, model.expansion(id).size());
    CHECK(longest >= 6);

    // lossless round trip over the full corpus + compression sanity
    long total_tokens = 0, total_bytes = 0;
    for (const std::string& l : lines) {
        const std::vector<int> ids = model.encode(l);
        CHECK(model.decode(ids) == l);
        total_tokens += static_cast<long>(ids.size());
        total_bytes += static_cast<long>(l.size());
    }
    CHECK(total_tokens <= total_bytes);
    CHECK(total_tokens < total_bytes / 2);  // journeys are highly regular
}

TEST_CASE("training is deterministic and the file round-trips bit-exact") {
    const std::vector<std::string> lines = journey_corpus(200, 3);
    const BpeTokenizer a = BpeTokenizer::train(lines, 400);
    const BpeTokenizer b = BpeTokenizer::train(lines, 400);
    CHECK(a.merges() == b.merges());
    CHECK(a.serialize() == b.serialize());

    const BpeTokenizer c = BpeTokenizer::deserialize(a.serialize());
    CHECK(c.merges() == a.merges());
    CHECK(c.serialize() == a.serialize());
    CHECK(c.hash() == a.hash());
    const std::string sample = lines[0];
    CHECK(c.encode(sample) == a.encode(sample));
}

TEST_CASE("vocab target must exceed the base vocabulary") {
    CHECK_THROWS(static_cast<void>(BpeTokenizer::train({"ab"}, 257)));
}
