// journeygen: textualize in-store journeys, train a small GPT on them from
// scratch, generate complete journeys from prompts, and evaluate fidelity.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <json.hpp>
#include <string>
#include <vector>

#include "journeygen/bpe.hpp"
#include "journeygen/checkpoint.hpp"
#include "journeygen/errors.hpp"
#include "journeygen/evaluator.hpp"
#include "journeygen/io_util.hpp"
#include "journeygen/journey_text.hpp"
#include "journeygen/purchase_model.hpp"
#include "journeygen/sampler.hpp"
#include "journeygen/spatial_codec.hpp"
#include "journeygen/synthstore.hpp"
#include "journeygen/training.hpp"

using namespace jgen;
using nlohmann::json;

namespace {

constexpr int kExitBadArgs = 2;
constexpr int kExitDataFormat = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitCheckpoint = 5;

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::string& path, const std::string& command, const json& options,
                    const json& inputs, const json& outputs, const json& metrics) {
    json m;
    m["command"] = command;
    m["options"] = options;
    m["config_hash"] = hex64(fnv1a64(options.dump()));
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["metrics"] = metrics;
    m["timestamp"] = now_iso8601();
    atomic_write_file(path, m.dump(2) + "\n");
}

json file_hash_entry(const std::string& path) {
    return json{{"path", path}, {"fnv1a64", hex64(fnv1a64(read_file(path)))}};
}

struct ModelFlags {
    int n_layer = 4;
    int n_head = 4;
    int d_model = 128;
    int d_ff = 0;
    int ctx_len = 256;

    void attach(CLI::App* cmd) {
        cmd->add_option("--n-layer", n_layer, "transformer layers");
        cmd->add_option("--n-head", n_head, "attention heads");
        cmd->add_option("--d-model", d_model, "model width");
        cmd->add_option("--d-ff", d_ff, "mlp width (0 = 4*d_model)");
        cmd->add_option("--ctx", ctx_len, "context window in tokens");
    }

    TransformerConfig config(int vocab, std::uint64_t seed) const {
        TransformerConfig c;
        c.n_layer = n_layer;
        c.n_head = n_head;
        c.d_model = d_model;
        c.d_ff = d_ff;
        c.ctx_len = ctx_len;
        c.vocab_size = vocab;
        c.seed = seed;
        return c;
    }
};

std::vector<int> parse_sizes(const std::string& spec) {
    // either "8,16,64" or a doubling range "8..4096"
    std::vector<int> out;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(spec.substr(0, dots));
        const int hi = std::stoi(spec.substr(dots + 2));
        if (lo < 1 || hi < lo) throw ConfigError("bad size range " + spec);
        for (long v = lo; v <= hi; v *= 2) out.push_back(static_cast<int>(v));
        return out;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        const auto comma = spec.find(',', pos);
        const std::string tok = spec.substr(pos, comma == std::string::npos ? spec.size() - pos
                                                                            : comma - pos);
        out.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("no sizes in " + spec);
    return out;
}

void check_tokenizer_compat(const LoadedCheckpoint& ck, const BpeTokenizer& tok) {
    if (ck.vocab_hash != tok.hash())
        throw CheckpointError("checkpoint was trained with a different tokenizer");
    if (tok.vocab_size() > ck.params.cfg.vocab_size)
        throw CheckpointError("checkpoint vocab smaller than tokenizer vocab");
}

// generation JSONL <-> evaluation
void write_generations(const std::string& path, const std::vector<GenerationResult>& gens) {
    std::string out;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        json j;
        j["prompt_id"] = i;
        j["text"] = gens[i].text;
        j["stop"] = stop_reason_name(gens[i].stop);
        j["valid"] = gens[i].parsed.ok;
        if (!gens[i].parsed.ok) {
            j["error_token"] = gens[i].parsed.error_token;
            j["error"] = gens[i].parsed.error.empty() ? gens[i].error : gens[i].parsed.error;
        }
        out += j.dump() + "\n";
    }
    atomic_write_file(path, out);
}

struct LoadedGenerations {
    std::vector<CellJourney> valid;
    long total = 0;
};

LoadedGenerations load_generations(const std::string& path) {
    LoadedGenerations out;
    for (const std::string& line : read_lines(path)) {
        if (line.empty()) continue;
        ++out.total;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataFormatError("bad generation record: " + std::string(e.what()));
        }
        if (!j.value("valid", false)) continue;
        const JourneyParseResult r = parse_journey_text(j.at("text").get<std::string>());
        if (r.ok) out.valid.push_back({r.cells, r.events});
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"in-store journey corpus, training and generation toolkit"};
    app.set_config("--config", "", "options file (ini); command-line flags win");
    app.require_subcommand(1);

    try {
        // ------------------------------------------------------------ synth
        auto* synth = app.add_subcommand("synth", "simulate a store and emit raw data files");
        std::string synth_preset = "A";
        int synth_n = 1000;
        std::uint64_t synth_seed = 0;
        std::string synth_out = "data";
        synth->add_option("--preset", synth_preset, "store preset: A (61 zones) or B (41)");
        synth->add_option("--n", synth_n, "journeys to simulate")->required();
        synth->add_option("--seed", synth_seed, "master seed")->required();
        synth->add_option("--out-dir", synth_out, "output directory");

        // ----------------------------------------------------- build-corpus
        auto* build = app.add_subcommand("build-corpus",
                                         "match, cluster, localize and textualize journeys");
        std::string bc_layout, bc_traj, bc_scanner, bc_out = "corpus.txt";
        double bc_eps = 2.5;
        int bc_minpts = 4;
        std::uint64_t bc_seed = 0;
        build->add_option("--layout", bc_layout)->required();
        build->add_option("--trajectories", bc_traj)->required();
        build->add_option("--scanner", bc_scanner)->required();
        build->add_option("--eps", bc_eps, "dwell clustering radius in xyt meters");
        build->add_option("--min-pts", bc_minpts, "dwell clustering core threshold");
        build->add_option("--seed", bc_seed, "seed for casual-purchase placement")->required();
        build->add_option("--out", bc_out);

        // --------------------------------------------------------- train-bpe
        auto* tbpe = app.add_subcommand("train-bpe", "train the byte-level BPE tokenizer");
        std::string tb_corpus, tb_out = "tokenizer.txt";
        int tb_vocab = 512;
        std::uint64_t tb_split_seed = 0;
        tbpe->add_option("--corpus", tb_corpus)->required();
        tbpe->add_option("--vocab", tb_vocab, "target vocabulary size");
        tbpe->add_option("--split-seed", tb_split_seed,
                         "corpus split seed; only the train split is seen")
            ->required();
        tbpe->add_option("--out", tb_out);

        // ---------------------------------------------------------- pretrain
        auto* pre = app.add_subcommand("pretrain", "train from scratch on a store corpus");
        std::string pt_corpus, pt_tok, pt_out = "model.ckpt";
        int pt_epochs = 10, pt_batch = 16;
        std::uint64_t pt_seed = 0, pt_split_seed = 0;
        double pt_lr = 3e-4;
        ModelFlags pt_model;
        pre->add_option("--corpus", pt_corpus)->required();
        pre->add_option("--tokenizer", pt_tok)->required();
        pre->add_option("--epochs", pt_epochs);
        pre->add_option("--batch", pt_batch);
        pre->add_option("--lr", pt_lr);
        pre->add_option("--seed", pt_seed)->required();
        pre->add_option("--split-seed", pt_split_seed)->required();
        pre->add_option("--out", pt_out);
        pt_model.attach(pre);

        // ---------------------------------------------------------- finetune
        auto* ft = app.add_subcommand("finetune", "continue a checkpoint on another store");
        std::string ft_corpus, ft_tok, ft_base, ft_out = "finetuned.ckpt";
        int ft_epochs = 3, ft_batch = 16, ft_n = 0;
        std::uint64_t ft_seed = 0, ft_split_seed = 0;
        double ft_lr = 3e-4;
        ft->add_option("--corpus", ft_corpus, "other-store corpus")->required();
        ft->add_option("--tokenizer", ft_tok, "tokenizer of the pretraining store")->required();
        ft->add_option("--base", ft_base, "pretrained checkpoint")->required();
        ft->add_option("--n-samples", ft_n, "train-split journeys to use (0 = all)");
        ft->add_option("--epochs", ft_epochs);
        ft->add_option("--batch", ft_batch);
        ft->add_option("--lr", ft_lr);
        ft->add_option("--seed", ft_seed)->required();
        ft->add_option("--split-seed", ft_split_seed)->required();
        ft->add_option("--out", ft_out);

        // ---------------------------------------------------------- generate
        auto* gen = app.add_subcommand("generate", "prompted journey generation");
        std::string gn_ckpt, gn_tok, gn_corpus, gn_out = "generated.jsonl", gn_export;
        int gn_n = 500, gn_points = 7, gn_max_new = 512, gn_top_k = 0;
        double gn_temp = 1.0, gn_top_p = 0.95;
        std::uint64_t gn_seed = 0, gn_split_seed = 0;
        gen->add_option("--checkpoint", gn_ckpt)->required();
        gen->add_option("--tokenizer", gn_tok)->required();
        gen->add_option("--corpus", gn_corpus, "corpus whose test split provides prompts")
            ->required();
        gen->add_option("--n", gn_n, "generations");
        gen->add_option("--prompt-points", gn_points, "time points fed as the prompt");
        gen->add_option("--temperature", gn_temp);
        gen->add_option("--top-k", gn_top_k);
        gen->add_option("--top-p", gn_top_p);
        gen->add_option("--max-new-tokens", gn_max_new);
        gen->add_option("--seed", gn_seed)->required();
        gen->add_option("--split-seed", gn_split_seed)->required();
        gen->add_option("--out", gn_out);
        gen->add_option("--export-trajectories", gn_export,
                        "also write decoded journeys in trajectory CSV form");

        // ---------------------------------------------------------- evaluate
        auto* ev = app.add_subcommand("evaluate", "fidelity report for generated journeys");
        std::string ev_gen, ev_corpus, ev_layout, ev_outdir = "eval";
        int ev_heat = 2000;
        std::uint64_t ev_seed = 0, ev_split_seed = 0;
        ev->add_option("--generated", ev_gen, "generation JSONL")->required();
        ev->add_option("--corpus", ev_corpus, "corpus whose test split is the reference")
            ->required();
        ev->add_option("--layout", ev_layout)->required();
        ev->add_option("--heatmap-samples", ev_heat);
        ev->add_option("--seed", ev_seed)->required();
        ev->add_option("--split-seed", ev_split_seed)->required();
        ev->add_option("--out-dir", ev_outdir);

        // ----------------------------------------------------- learning-curve
        auto* lc = app.add_subcommand("learning-curve",
                                      "fine-tune vs scratch across training sizes");
        std::string lc_corpus, lc_tok, lc_base, lc_out = "curve.csv";
        std::string lc_sizes = "8..4096";
        int lc_ft_epochs = 3, lc_sc_epochs = 3, lc_batch = 16;
        std::uint64_t lc_seed = 0, lc_split_seed = 0;
        ModelFlags lc_model;
        lc->add_option("--corpus-b", lc_corpus, "other-store corpus")->required();
        lc->add_option("--tokenizer", lc_tok)->required();
        lc->add_option("--base", lc_base, "pretrained checkpoint")->required();
        lc->add_option("--sizes", lc_sizes, "comma list or doubling range lo..hi");
        lc->add_option("--ft-epochs", lc_ft_epochs);
        lc->add_option("--scratch-epochs", lc_sc_epochs);
        lc->add_option("--batch", lc_batch);
        lc->add_option("--seed", lc_seed)->required();
        lc->add_option("--split-seed", lc_split_seed)->required();
        lc->add_option("--out", lc_out);
        lc_model.attach(lc);

        app.parse(argc, argv);
        const SpatialCodec codec;

        if (*synth) {
            if (synth_preset != "A" && synth_preset != "B")
                throw ConfigError("--preset must be A or B");
            const StoreLayout layout = make_layout(synth_preset[0], synth_seed);
            const SimResult sim = simulate_journeys(layout, ShopperModel{}, synth_n, synth_seed);
            const std::string base = synth_out + "/";
            save_layout(layout, base + "layout.json");
            save_trajectories(sim.trajectories, base + "trajectories.csv");
            save_scanner_items(sim.items, base + "scanner.csv");
            save_ground_truth(sim, base + "truth.jsonl");
            write_manifest(base + "manifest_synth.json", "synth",
                           {{"preset", synth_preset}, {"n", synth_n}, {"seed", synth_seed}},
                           json::array(),
                           {base + "layout.json", base + "trajectories.csv", base + "scanner.csv",
                            base + "truth.jsonl"},
                           {{"zones", layout.zones.size()},
                            {"layout_hash", hex64(layout_hash(layout))},
                            {"items", sim.items.size()}});
            std::printf("synth: %d journeys, %zu items, %zu zones -> %s\n", synth_n,
                        sim.items.size(), layout.zones.size(), synth_out.c_str());
            return 0;
        }

        if (*build) {
            const StoreLayout layout = load_layout(bc_layout);
            const std::vector<Trajectory> trajs = load_trajectories(bc_traj);
            const std::vector<ScannerItem> items = load_scanner_items(bc_scanner);
            PipelineOptions opts;
            opts.eps = bc_eps;
            opts.min_pts = bc_minpts;
            opts.seed = bc_seed;
            const PipelineResult res = annotate_journeys(trajs, items, layout, codec, opts);
            build_corpus(res.journeys, bc_out);
            write_manifest(bc_out + ".manifest.json", "build-corpus",
                           {{"eps", bc_eps}, {"min_pts", bc_minpts}, {"seed", bc_seed}},
                           {file_hash_entry(bc_layout), file_hash_entry(bc_traj),
                            file_hash_entry(bc_scanner)},
                           {bc_out},
                           {{"journeys", res.journeys.size()},
                            {"matched_quantity", res.matched_quantity},
                            {"event_quantity", res.event_quantity},
                            {"excluded_quantity", res.excluded_quantity},
                            {"unmatched_items", res.unmatched_items}});
            std::printf("build-corpus: %zu journeys, %ld located + %ld excluded of %ld items\n",
                        res.journeys.size(), res.event_quantity, res.excluded_quantity,
                        res.matched_quantity);
            return 0;
        }

        if (*tbpe) {
            const std::vector<std::string> lines = read_lines(tb_corpus);
            const CorpusSplit split = make_corpus_split(lines, SplitSpec{.seed = tb_split_seed});
            const BpeTokenizer tok = BpeTokenizer::train(split.train, tb_vocab);
            tok.save(tb_out);
            write_manifest(tb_out + ".manifest.json", "train-bpe",
                           {{"vocab", tb_vocab}, {"split_seed", tb_split_seed}},
                           {file_hash_entry(tb_corpus)}, {tb_out},
                           {{"vocab_size", tok.vocab_size()},
                            {"merges", tok.merges().size()},
                            {"tokenizer_hash", hex64(tok.hash())}});
            std::printf("train-bpe: vocab %d (%zu merges) -> %s\n", tok.vocab_size(),
                        tok.merges().size(), tb_out.c_str());
            return 0;
        }

        if (*pre) {
            const std::vector<std::string> lines = read_lines(pt_corpus);
            const CorpusSplit split = make_corpus_split(lines, SplitSpec{.seed = pt_split_seed});
            const BpeTokenizer tok = BpeTokenizer::load(pt_tok);
            TrainOptions opts;
            opts.epochs = pt_epochs;
            opts.batch_size = pt_batch;
            opts.adam.lr = pt_lr;
            opts.seed = pt_seed;
            opts.verbose = true;
            const TrainResult res =
                pretrain(pt_model.config(tok.vocab_size(), pt_seed), split.train, split.val, tok,
                         opts, pt_out);
            atomic_write_file(pt_out + ".run.json", train_run_to_json(res.run));
            write_manifest(pt_out + ".manifest.json", "pretrain",
                           {{"epochs", pt_epochs},
                            {"batch", pt_batch},
                            {"lr", pt_lr},
                            {"seed", pt_seed},
                            {"split_seed", pt_split_seed}},
                           {file_hash_entry(pt_corpus), file_hash_entry(pt_tok)},
                           {pt_out, pt_out + ".run.json"},
                           {{"best_val", res.run.best_val},
                            {"best_epoch", res.run.best_epoch},
                            {"steps", res.run.steps}});
            std::printf("pretrain: best val %.4f at epoch %d -> %s\n", res.run.best_val,
                        res.run.best_epoch + 1, pt_out.c_str());
            return 0;
        }

        if (*ft) {
            const std::vector<std::string> lines = read_lines(ft_corpus);
            const CorpusSplit split = make_corpus_split(lines, SplitSpec{.seed = ft_split_seed});
            const BpeTokenizer tok = BpeTokenizer::load(ft_tok);
            const LoadedCheckpoint ck = load_checkpoint(ft_base);
            check_tokenizer_compat(ck, tok);
            TrainOptions opts;
            opts.epochs = ft_epochs;
            opts.batch_size = ft_batch;
            opts.adam.lr = ft_lr;
            opts.seed = ft_seed;
            opts.verbose = true;
            const int n = ft_n > 0 ? ft_n : static_cast<int>(split.train.size());
            const TrainResult res = finetune(ck.params, split.train, n, split.val, tok, opts,
                                             ft_out);
            atomic_write_file(ft_out + ".run.json", train_run_to_json(res.run));
            write_manifest(ft_out + ".manifest.json", "finetune",
                           {{"n_samples", n},
                            {"epochs", ft_epochs},
                            {"batch", ft_batch},
                            {"lr", ft_lr},
                            {"seed", ft_seed},
                            {"split_seed", ft_split_seed}},
                           {file_hash_entry(ft_corpus), file_hash_entry(ft_tok),
                            file_hash_entry(ft_base)},
                           {ft_out, ft_out + ".run.json"},
                           {{"best_val", res.run.best_val}, {"steps", res.run.steps}});
            std::printf("finetune: n=%d best val %.4f -> %s\n", n, res.run.best_val,
                        ft_out.c_str());
            return 0;
        }

        if (*gen) {
            const BpeTokenizer tok = BpeTokenizer::load(gn_tok);
            const LoadedCheckpoint ck = load_checkpoint(gn_ckpt);
            check_tokenizer_compat(ck, tok);
            const std::vector<std::string> lines = read_lines(gn_corpus);
            const CorpusSplit split = make_corpus_split(lines, SplitSpec{.seed = gn_split_seed});
            std::vector<std::string> prompts;
            for (const std::string& line : split.test) {
                if (static_cast<int>(prompts.size()) >= gn_n) break;
                const JourneyParseResult r = parse_journey_text(line);
                if (!r.ok || static_cast<int>(r.codes.size()) < gn_points) continue;
                prompts.push_back(make_prompt({r.codes, r.events}, gn_points));
            }
            if (prompts.empty()) throw ConfigError("no test journeys long enough to prompt");
            SamplingConfig sc;
            sc.temperature = gn_temp;
            sc.top_k = gn_top_k;
            sc.top_p = gn_top_p;
            sc.max_new_tokens = gn_max_new;
            sc.seed = gn_seed;
            const std::vector<GenerationResult> gens = generate_batch(ck.params, tok, prompts, sc);
            write_generations(gn_out, gens);

            long valid = 0;
            for (const auto& g : gens) valid += g.parsed.ok ? 1 : 0;
            const double rate = static_cast<double>(valid) / gens.size();
            if (!gn_export.empty()) {
                std::vector<Trajectory> decoded;
                for (std::size_t i = 0; i < gens.size(); ++i) {
                    if (!gens[i].parsed.ok) continue;
                    Trajectory t;
                    t.customer_id = "g" + std::to_string(i);
                    double tt = 0.0;
                    for (const GridCell& cell : gens[i].parsed.cells) {
                        const Point2D p = codec.cell_center(cell);
                        t.points.push_back({tt, p.x, p.y});
                        tt += 5.0;
                    }
                    t.checkout_time = tt - 5.0;
                    decoded.push_back(std::move(t));
                }
                save_trajectories(decoded, gn_export);
            }
            write_manifest(gn_out + ".manifest.json", "generate",
                           {{"n", gn_n},
                            {"prompt_points", gn_points},
                            {"temperature", gn_temp},
                            {"top_k", gn_top_k},
                            {"top_p", gn_top_p},
                            {"max_new_tokens", gn_max_new},
                            {"seed", gn_seed},
                            {"split_seed", gn_split_seed}},
                           {file_hash_entry(gn_ckpt), file_hash_entry(gn_tok),
                            file_hash_entry(gn_corpus)},
                           {gn_out},
                           {{"generations", gens.size()}, {"valid_rate", rate}});
            std::printf("generate: %zu journeys, %.1f%% valid -> %s\n", gens.size(), 100.0 * rate,
                        gn_out.c_str());
            return 0;
        }

        if (*ev) {
            const StoreLayout layout = load_layout(ev_layout);
            const LoadedGenerations gens = load_generations(ev_gen);
            if (gens.valid.empty()) throw DataFormatError("no valid generations to evaluate");
            const std::vector<std::string> lines = read_lines(ev_corpus);
            const CorpusSplit split = make_corpus_split(lines, SplitSpec{.seed = ev_split_seed});
            const std::vector<CellJourney> reference = decode_corpus_lines(split.test);
            EvalReport report =
                compare_report(gens.valid, reference, layout, codec, ev_heat, ev_seed);
            report.validity_rate = static_cast<double>(gens.valid.size()) / gens.total;
            const std::string base = ev_outdir + "/";
            atomic_write_file(base + "report.json", report_to_json(report));
            atomic_write_file(base + "zone_table.csv", zone_table_csv(report, layout));
            atomic_write_file(base + "heat_generated.txt", heatmap_to_text(report.heat_generated));
            atomic_write_file(base + "heat_reference.txt", heatmap_to_text(report.heat_reference));
            atomic_write_file(base + "heat_generated.pgm", heatmap_to_pgm(report.heat_generated));
            atomic_write_file(base + "heat_reference.pgm", heatmap_to_pgm(report.heat_reference));
            write_manifest(base + "manifest_evaluate.json", "evaluate",
                           {{"heatmap_samples", ev_heat},
                            {"seed", ev_seed},
                            {"split_seed", ev_split_seed}},
                           {file_hash_entry(ev_gen), file_hash_entry(ev_corpus),
                            file_hash_entry(ev_layout)},
                           {base + "report.json", base + "zone_table.csv"},
                           {{"zone_js", report.zone_js},
                            {"heatmap_js", report.heatmap_js},
                            {"validity_rate", report.validity_rate}});
            std::printf("evaluate: zone JS %.5f, heatmap JS %.5f, validity %.1f%% -> %s\n",
                        report.zone_js, report.heatmap_js, 100.0 * report.validity_rate,
                        ev_outdir.c_str());
            return 0;
        }

        if (*lc) {
            const BpeTokenizer tok = BpeTokenizer::load(lc_tok);
            const LoadedCheckpoint ck = load_checkpoint(lc_base);
            check_tokenizer_compat(ck, tok);
            const std::vector<std::string> lines = read_lines(lc_corpus);
            const CorpusSplit split = make_corpus_split(lines, SplitSpec{.seed = lc_split_seed});
            const std::vector<int> sizes = parse_sizes(lc_sizes);
            TrainOptions ft_opts;
            ft_opts.epochs = lc_ft_epochs;
            ft_opts.batch_size = lc_batch;
            ft_opts.seed = lc_seed;
            TrainOptions sc_opts = ft_opts;
            sc_opts.epochs = lc_sc_epochs;
            const TransformerConfig scratch_cfg = lc_model.config(tok.vocab_size(), lc_seed);
            const std::vector<CurvePoint> table = learning_curve(
                ck.params, scratch_cfg, split, tok, sizes, ft_opts, sc_opts,
                [&](const CurvePoint& p, const TransformerParams<float>&) {
                    std::printf("  size %5d  %-8s  val %.4f\n", p.size, p.mode.c_str(),
                                p.val_loss);
                });
            atomic_write_file(lc_out, curve_to_csv(table));
            write_manifest(lc_out + ".manifest.json", "learning-curve",
                           {{"sizes", lc_sizes},
                            {"ft_epochs", lc_ft_epochs},
                            {"scratch_epochs", lc_sc_epochs},
                            {"seed", lc_seed},
                            {"split_seed", lc_split_seed}},
                           {file_hash_entry(lc_corpus), file_hash_entry(lc_tok),
                            file_hash_entry(lc_base)},
                           {lc_out}, {{"rows", table.size()}});
            std::printf("learning-curve: %zu rows -> %s\n", table.size(), lc_out.c_str());
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitBadArgs;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error (bad arguments): %s\n", e.what());
        return kExitBadArgs;
    } catch (const DataFormatError& e) {
        std::fprintf(stderr, "error (data format): %s\n", e.what());
        return kExitDataFormat;
    } catch (const TrainingDivergenceError& e) {
        std::fprintf(stderr, "error (training divergence): %s\n", e.what());
        return kExitDivergence;
    } catch (const CheckpointError& e) {
        std::fprintf(stderr, "error (incompatible checkpoint): %s\n", e.what());
        return kExitCheckpoint;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
