#include "journeygen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <json.hpp>

#include "journeygen/errors.hpp"
#include "journeygen/io_util.hpp"

namespace jgen {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs assume a little-endian host");

namespace {
constexpr char kMagic[4] = {'J', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

json config_to_json(const TransformerConfig& c) {
    return json{{"n_layer", c.n_layer},   {"n_head", c.n_head},
                {"d_model", c.d_model},   {"d_ff", c.ff_dim()},
                {"ctx_len", c.ctx_len},   {"vocab_size", c.vocab_size},
                {"seed", c.seed}};
}

TransformerConfig config_from_json(const json& j) {
    TransformerConfig c;
    c.n_layer = j.at("n_layer").get<int>();
    c.n_head = j.at("n_head").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.ctx_len = j.at("ctx_len").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

template <typename T>
void append_raw(std::string& out, const T& v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void save_checkpoint(const std::string& path, const TransformerParams<float>& params, long step,
                     std::uint64_t vocab_hash) {
    json header;
    header["config"] = config_to_json(params.cfg);
    header["step"] = step;
    header["vocab_hash"] = hex64(vocab_hash);
    header["tensors"] = json::array();
    params.for_each([&](const std::string& name, const MatX<float>& m) {
        header["tensors"].push_back(
            {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    });
    const std::string htext = header.dump();

    std::string out;
    out.append(kMagic, 4);
    append_raw(out, kVersion);
    append_raw(out, static_cast<std::uint64_t>(htext.size()));
    out += htext;
    params.for_each([&](const std::string&, const MatX<float>& m) {
        out.append(reinterpret_cast<const char*>(m.data()), sizeof(float) * m.size());
    });
    atomic_write_file(path, out);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    const std::string data = read_file(path);
    if (data.size() < 16 || std::memcmp(data.data(), kMagic, 4) != 0)
        throw CheckpointError("not a checkpoint file: " + path);
    std::uint32_t version = 0;
    std::memcpy(&version, data.data() + 4, 4);
    if (version != kVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    std::uint64_t hlen = 0;
    std::memcpy(&hlen, data.data() + 8, 8);
    if (16 + hlen > data.size()) throw CheckpointError("truncated checkpoint header");

    json header;
    try {
        header = json::parse(data.substr(16, hlen));
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
    }

    LoadedCheckpoint ck;
    try {
        ck.params = TransformerParams<float>::shaped(config_from_json(header.at("config")));
        ck.step = header.at("step").get<long>();
        ck.vocab_hash = std::stoull(header.at("vocab_hash").get<std::string>(), nullptr, 16);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
    }

    std::size_t off = 16 + hlen;
    std::size_t ti = 0;
    const json& tensors = header.at("tensors");
    bool ok = true;
    ck.params.for_each([&](const std::string& name, MatX<float>& m) {
        if (!ok) return;
        if (ti >= tensors.size()) {
            ok = false;
            return;
        }
        const json& t = tensors[ti++];
        if (t.at("name") != name || t.at("rows").get<Eigen::Index>() != m.rows() ||
            t.at("cols").get<Eigen::Index>() != m.cols()) {
            ok = false;
            return;
        }
        const std::size_t bytes = sizeof(float) * m.size();
        if (off + bytes > data.size()) {
            ok = false;
            return;
        }
        std::memcpy(m.data(), data.data() + off, bytes);
        off += bytes;
    });
    if (!ok || ti != tensors.size())
        throw CheckpointError("checkpoint tensors do not match config shapes: " + path);
    return ck;
}

}  // namespace jgen
