#include "journeygen/journey_text.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "journeygen/errors.hpp"
#include "journeygen/io_util.hpp"

namespace jgen {

std::string journey_to_text(const std::vector<std::string>& codes,
                            const std::vector<PurchaseEvent>& events) {
    std::map<int, int> count_at;
    for (const PurchaseEvent& e : events) {
        if (e.point_index < 0 || e.point_index >= static_cast<int>(codes.size()))
            throw DataFormatError("purchase event index " + std::to_string(e.point_index) +
                                  " outside journey of " + std::to_string(codes.size()) +
                                  " points");
        if (e.count < 1) throw DataFormatError("purchase count must be >= 1");
        count_at[e.point_index] += e.count;
    }
    std::string out;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += codes[i];
        const auto it = count_at.find(static_cast<int>(i));
        if (it != count_at.end()) out += std::to_string(it->second);
    }
    if (!out.empty()) out.push_back(' ');
    out.push_back('.');
    return out;
}

namespace {

std::vector<std::string> split_ws(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

JourneyParseResult fail(int token, std::string msg) {
    JourneyParseResult r;
    r.error_token = token;
    r.error = std::move(msg);
    return r;
}

}  // namespace

JourneyParseResult parse_journey_text(const std::string& text) {
    const std::vector<std::string> tokens = split_ws(text);
    if (tokens.empty()) return fail(-1, "empty text, missing terminator");

    JourneyParseResult r;
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
        const std::string& tok = tokens[ti];
        if (tok == ".") {
            if (ti + 1 != tokens.size())
                return fail(static_cast<int>(ti), "terminator before end of line");
            r.ok = true;
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(tok[0])))
            return fail(static_cast<int>(ti), "dangling digits with no preceding code");
        if (tok.size() < 6)
            return fail(static_cast<int>(ti), "token \"" + tok + "\" shorter than a 6-char code");
        const std::string code = tok.substr(0, 6);
        const CodeParseStatus st = SpatialCodec::try_decode(code);
        if (!st.ok) return fail(static_cast<int>(ti), st.error);
        const std::string rest = tok.substr(6);
        int count = 0;
        if (!rest.empty()) {
            if (!std::all_of(rest.begin(), rest.end(),
                             [](unsigned char c) { return std::isdigit(c); }))
                return fail(static_cast<int>(ti),
                            "trailing characters \"" + rest + "\" are not a purchase count");
            if (rest.size() > 9) return fail(static_cast<int>(ti), "purchase count too large");
            count = std::stoi(rest);
            if (count < 1)
                return fail(static_cast<int>(ti), "purchase count must be >= 1, got " + rest);
        }
        r.codes.push_back(code);
        r.cells.push_back(st.cell);
        if (count > 0) r.events.push_back({static_cast<int>(r.codes.size()) - 1, count});
    }
    return fail(static_cast<int>(tokens.size()) - 1, "missing terminator \".\"");
}

std::string corpus_to_string(const std::vector<TextJourney>& journeys) {
    std::ostringstream out;
    for (const TextJourney& j : journeys) out << journey_to_text(j.codes, j.events) << '\n';
    return out.str();
}

void build_corpus(const std::vector<TextJourney>& journeys, const std::string& path) {
    atomic_write_file(path, corpus_to_string(journeys));
}

}  // namespace jgen
