#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cyclegate/config.hpp"
#include "cyclegate/image_io.hpp"
#include "cyclegate/rng.hpp"
#include "cyclegate/synth.hpp"

namespace fs = std::filesystem;
using namespace cyclegate;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    out << content;
    if (!out) throw io_error("write failed for " + path);
}

// Per-pair JSONL record: outcome scalars plus mask file references (null
// unless mask artifacts were emitted).
void write_records(const EvalReport& report, const std::string& out_dir, bool emit_masks) {
    std::string mask_dir = (fs::path(out_dir) / "masks").string();
    if (emit_masks) ensure_dir(mask_dir);
    std::ofstream out(fs::path(out_dir) / "records.jsonl", std::ios::binary);
    if (!out) throw io_error("cannot write records.jsonl in " + out_dir);
    for (const auto& o : report.outcomes) {
        nlohmann::ordered_json j = outcome_to_json(o);
        if (emit_masks) {
            std::string fwd = "masks/" + o.pair_id + "_forward.png";
            std::string rev = "masks/" + o.pair_id + "_reverse.png";
            std::string fin = "masks/" + o.pair_id + "_final.png";
            save_mask(o.record.forward_mask, (fs::path(out_dir) / fwd).string());
            save_mask(o.record.reverse_mask, (fs::path(out_dir) / rev).string());
            save_mask(o.record.final_mask, (fs::path(out_dir) / fin).string());
            j["forward_mask_path"] = fwd;
            j["reverse_mask_path"] = rev;
            j["final_mask_path"] = fin;
        } else {
            j["forward_mask_path"] = nullptr;
            j["reverse_mask_path"] = nullptr;
            j["final_mask_path"] = nullptr;
        }
        out << j.dump() << "\n";
    }
}

int cmd_evaluate(const std::string& config_path, const std::string& out_override, int workers_override) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (workers_override > 0) cfg.worker_count = workers_override;
    if (cfg.manifest_path.empty())
        throw validation_error(config_path + ": key 'manifest' is required for evaluate");
    cfg.eval.validate();

    auto manifest = load_manifest(cfg.manifest_path);
    EvalReport report = evaluate(manifest, cfg.eval, cfg.worker_count);

    ensure_dir(cfg.output_dir);
    write_text((fs::path(cfg.output_dir) / "report.json").string(), report_to_json(report).dump(2) + "\n");
    write_text((fs::path(cfg.output_dir) / "summary.csv").string(),
               reports_to_csv({{report.stage1_threshold, report}}));
    write_records(report, cfg.output_dir, cfg.emit_mask_artifacts);

    std::cout << "pairs=" << manifest.size() << " catch_rate=" << format_rate(report.catch_rate)
              << " yield_rate=" << format_rate(report.yield_rate)
              << " pes=" << format_rate(report.pes) << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<double>& taus,
              const std::string& out_override, int workers_override) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (workers_override > 0) cfg.worker_count = workers_override;
    if (cfg.manifest_path.empty())
        throw validation_error(config_path + ": key 'manifest' is required for sweep");
    cfg.eval.validate();

    auto manifest = load_manifest(cfg.manifest_path);
    auto rows = sweep_thresholds(manifest, cfg.eval, taus, cfg.worker_count);

    ensure_dir(cfg.output_dir);
    std::string csv = reports_to_csv(rows);
    write_text((fs::path(cfg.output_dir) / "sweep.csv").string(), csv);
    std::cout << csv;
    return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t seed, int positives, int negatives,
              int size, int patch) {
    SynthSpec spec;
    spec.seed = seed;
    spec.n_positive = positives;
    spec.n_negative = negatives;
    spec.image_size = size;
    spec.patch_size = patch;
    auto entries = generate_corpus(spec, out_dir);
    std::cout << "wrote " << entries.size() << " pairs to " << out_dir << "\n";
    return 0;
}

int cmd_augment(const std::string& config_path, const std::string& out_override,
                std::int64_t seed_override) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override >= 0) cfg.augment.seed = static_cast<std::uint64_t>(seed_override);
    if (cfg.manifest_path.empty())
        throw validation_error(config_path + ": key 'manifest' is required for augment");

    auto manifest = load_manifest(cfg.manifest_path);
    ensure_dir(cfg.output_dir);

    nlohmann::ordered_json lines = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& e = manifest[i];
        Raster support = load_raster(e.support_image_path);
        BinaryMask support_mask = load_mask(e.support_mask_path);
        Raster query = load_raster(e.query_image_path);
        BinaryMask gt = e.gt_mask_path.empty() ? BinaryMask(query.width(), query.height())
                                               : load_mask(e.gt_mask_path);

        // Two independent draws per pair: support side, then query side.
        auto [aug_support, aug_support_mask] =
            apply_policy(support, support_mask, cfg.augment, 2 * i);
        auto [aug_query, aug_gt] = apply_policy(query, gt, cfg.augment, 2 * i + 1);

        std::string support_img = e.pair_id + "_support.png";
        std::string support_msk = e.pair_id + "_support_mask.png";
        std::string query_img = e.pair_id + "_query.png";
        std::string gt_msk = e.pair_id + "_gt.png";
        save_raster(aug_support, (fs::path(cfg.output_dir) / support_img).string());
        save_mask(aug_support_mask, (fs::path(cfg.output_dir) / support_msk).string());
        save_raster(aug_query, (fs::path(cfg.output_dir) / query_img).string());
        if (!e.gt_mask_path.empty())
            save_mask(aug_gt, (fs::path(cfg.output_dir) / gt_msk).string());

        nlohmann::ordered_json j;
        j["pair_id"] = e.pair_id;
        j["polarity"] = e.polarity == Polarity::Positive ? "positive" : "negative";
        j["support_image_path"] = support_img;
        j["support_mask_path"] = support_msk;
        j["query_image_path"] = query_img;
        if (!e.gt_mask_path.empty()) j["gt_mask_path"] = gt_msk;
        lines.push_back(std::move(j));
    }

    std::string manifest_out = (fs::path(cfg.output_dir) / "manifest.jsonl").string();
    std::string content;
    for (const auto& j : lines) content += j.dump() + "\n";
    write_text(manifest_out, content);
    std::cout << "augmented " << manifest.size() << " pairs into " << cfg.output_dir << "\n";
    return 0;
}

// Fast invariant checks over the built-in components.
int cmd_selfcheck() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    CounterRng rng(1234, 0);
    {
        bool ok = true;
        for (int i = 0; i < 500; ++i) {
            int w = 1 + static_cast<int>(rng.next_below(32));
            int h = 1 + static_cast<int>(rng.next_below(32));
            BinaryMask a(w, h), b(w, h);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    a.set(x, y, rng.next_double() < 0.5);
                    b.set(x, y, rng.next_double() < 0.5);
                }
            double ab = iou(a, b);
            ok = ok && ab >= 0.0 && ab <= 1.0 && ab == iou(b, a) && iou(a, a) == 1.0;
            ok = ok && miou(a, b, MiouMode::ForegroundOnly) == ab;
        }
        check("iou symmetry/range/identity over 500 random masks", ok);
    }
    {
        auto [support, mask] = synth_support(99, 0, 96, 20);
        NccSegmenter seg(0.8, 0.2);
        PromptResult fwd = seg.segment({support, mask, support}, {});
        PromptResult rev = seg.segment({support, fwd.mask, support}, {});
        double pc = confidence(fwd.score, rev.score, mask, rev.mask);
        check("reference segmenter self-match cycle (p_c >= 0.95)",
              iou(fwd.mask, mask) >= 0.99 && pc >= 0.95);
    }
    {
        CounterRng a(7, 3), b(7, 3), c(8, 3);
        bool same = true, diff = false;
        for (int i = 0; i < 100; ++i) {
            auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
            same = same && x == y;
            diff = diff || x != z;
        }
        check("counter rng determinism and seed separation", same && diff);
    }
    {
        Raster r(4, 4, 1);
        CounterRng g(5, 5);
        for (auto& s : r.samples()) s = static_cast<std::uint8_t>(g.next_below(256));
        check("hflip involution", hflip(hflip(r)) == r);
        check("identity resize", resize_nearest(r, 4, 4) == r);
        check("brightness identity", adjust_brightness(r, 1.0) == r);
    }
    if (failures > 0) {
        std::cout << failures << " selfcheck failure(s)\n";
        return 3;
    }
    std::cout << "all selfchecks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cycle-consistency gated one-shot segmentation pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;
    std::vector<double> taus;
    std::uint64_t seed = 7;
    std::int64_t aug_seed = -1;
    int positives = 10, negatives = 10, size = 96, patch = 20;

    auto* evaluate_cmd = app.add_subcommand("evaluate", "gate and score a manifest");
    evaluate_cmd->add_option("--config", config_path, "config file")->required();
    evaluate_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    evaluate_cmd->add_option("--workers", workers, "worker count (overrides config)");

    auto* sweep_cmd = app.add_subcommand("sweep", "evaluate across stage-1 thresholds");
    sweep_cmd->add_option("--config", config_path, "config file")->required();
    sweep_cmd->add_option("--taus", taus, "stage-1 thresholds to sweep")->required()->delimiter(',');
    sweep_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    sweep_cmd->add_option("--workers", workers, "worker count (overrides config)");

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--out", out_dir, "output directory")->required();
    synth_cmd->add_option("--seed", seed, "corpus seed");
    synth_cmd->add_option("--positives", positives, "positive pair count");
    synth_cmd->add_option("--negatives", negatives, "negative pair count");
    synth_cmd->add_option("--size", size, "image side length");
    synth_cmd->add_option("--patch", patch, "defect patch side length");

    auto* augment_cmd = app.add_subcommand("augment", "apply the augmentation policy to a manifest");
    augment_cmd->add_option("--config", config_path, "config file")->required();
    augment_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    augment_cmd->add_option("--seed", aug_seed, "policy seed (overrides config)");

    app.add_subcommand("selfcheck", "run the built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (evaluate_cmd->parsed()) return cmd_evaluate(config_path, out_dir, workers);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, taus, out_dir, workers);
        if (synth_cmd->parsed()) return cmd_synth(out_dir, seed, positives, negatives, size, patch);
        if (augment_cmd->parsed()) return cmd_augment(config_path, out_dir, aug_seed);
        return cmd_selfcheck();
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::Validation ? "validation"
                           : e.kind() == ErrorKind::Io      ? "io"
                                                            : "internal";
        std::cerr << "error[" << kind << "]: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 3;
    }
}
