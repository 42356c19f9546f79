#include "cyclegate/eval.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "cyclegate/image_io.hpp"

namespace cyclegate {

namespace fs = std::filesystem;

void EvalConfig::validate() const {
    gate.validate();
    if (catch_iou_threshold < 0.0 || catch_iou_threshold > 1.0)
        throw validation_error("EvalConfig.catch_iou_threshold: must be in [0,1], got " +
                               std::to_string(catch_iou_threshold));
    if (yield_response_threshold < 0.0 || yield_response_threshold > 1.0)
        throw validation_error("EvalConfig.yield_response_threshold: must be in [0,1], got " +
                               std::to_string(yield_response_threshold));
}

std::vector<PairManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open manifest " + path);
    fs::path base = fs::path(path).parent_path();

    auto resolve = [&](const std::string& p) { return (base / p).lexically_normal().string(); };

    std::vector<PairManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw validation_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        PairManifestEntry e;
        try {
            e.pair_id = j.at("pair_id").get<std::string>();
            std::string pol = j.at("polarity").get<std::string>();
            if (pol == "positive") {
                e.polarity = Polarity::Positive;
            } else if (pol == "negative") {
                e.polarity = Polarity::Negative;
            } else {
                throw validation_error("polarity must be positive|negative, got '" + pol + "'");
            }
            e.support_image_path = resolve(j.at("support_image_path").get<std::string>());
            e.support_mask_path = resolve(j.at("support_mask_path").get<std::string>());
            e.query_image_path = resolve(j.at("query_image_path").get<std::string>());
            if (j.contains("gt_mask_path") && !j["gt_mask_path"].is_null())
                e.gt_mask_path = resolve(j["gt_mask_path"].get<std::string>());
        } catch (const nlohmann::json::exception& ex) {
            throw validation_error(path + ":" + std::to_string(lineno) + ": " + ex.what());
        }
        if (e.polarity == Polarity::Positive && e.gt_mask_path.empty())
            throw validation_error("manifest pair '" + e.pair_id +
                                   "': positive entry lacks gt_mask_path");
        for (const std::string* p :
             {&e.support_image_path, &e.support_mask_path, &e.query_image_path}) {
            if (!fs::exists(*p))
                throw io_error("manifest pair '" + e.pair_id + "': missing file " + *p);
        }
        if (!e.gt_mask_path.empty() && !fs::exists(e.gt_mask_path))
            throw io_error("manifest pair '" + e.pair_id + "': missing file " + e.gt_mask_path);
        entries.push_back(std::move(e));
    }
    return entries;
}

PairOutcome score_pair(const PairManifestEntry& entry, const CycleRecord& record,
                       const BinaryMask* gt_mask, const EvalConfig& cfg) {
    PairOutcome out;
    out.pair_id = entry.pair_id;
    out.polarity = entry.polarity;
    out.record = record;
    if (entry.polarity == Polarity::Positive) {
        if (gt_mask == nullptr)
            throw validation_error("pair '" + entry.pair_id + "': positive pair without ground truth");
        out.metric = iou(record.final_mask, *gt_mask);
        out.correct = out.metric >= cfg.catch_iou_threshold;
    } else {
        out.metric = response_rate(record.final_mask);
        out.correct = out.metric <= cfg.yield_response_threshold;
    }
    return out;
}

namespace {

struct LoadedPair {
    Raster support_image;
    BinaryMask support_mask;
    Raster query_image;
    std::optional<BinaryMask> gt_mask;
};

LoadedPair load_pair(const PairManifestEntry& e) {
    LoadedPair p;
    try {
        p.support_image = load_raster(e.support_image_path);
        p.support_mask = load_mask(e.support_mask_path);
        p.query_image = load_raster(e.query_image_path);
        if (!e.gt_mask_path.empty()) p.gt_mask = load_mask(e.gt_mask_path);
    } catch (const Error& err) {
        throw Error(err.kind(), "pair '" + e.pair_id + "': " + err.what());
    }
    if (p.support_image.width() != p.support_mask.width() ||
        p.support_image.height() != p.support_mask.height())
        throw validation_error("pair '" + e.pair_id + "': support image/mask dimension mismatch");
    if (p.gt_mask && (p.gt_mask->width() != p.query_image.width() ||
                      p.gt_mask->height() != p.query_image.height()))
        throw validation_error("pair '" + e.pair_id + "': ground truth/query dimension mismatch");
    return p;
}

// Runs fn(i) for every index over worker_count threads; first error wins.
void parallel_for(std::size_t count, int worker_count, const std::function<void(std::size_t)>& fn) {
    if (worker_count <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    int n = static_cast<int>(std::min<std::size_t>(worker_count, count));
    threads.reserve(n);
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

EvalReport aggregate_outcomes(const std::vector<PairOutcome>& outcomes, const EvalConfig& cfg) {
    EvalReport report;
    report.stage1_threshold = cfg.gate.stages.empty() ? 0.0 : cfg.gate.stages.front().threshold;
    int catches = 0, yields = 0;
    for (const auto& o : outcomes) {
        if (o.polarity == Polarity::Positive) {
            ++report.n_positive;
            catches += o.correct ? 1 : 0;
        } else {
            ++report.n_negative;
            yields += o.correct ? 1 : 0;
        }
    }
    if (report.n_positive > 0)
        report.catch_rate = static_cast<double>(catches) / report.n_positive;
    if (report.n_negative > 0)
        report.yield_rate = static_cast<double>(yields) / report.n_negative;
    if (report.catch_rate && report.yield_rate)
        report.pes = (*report.catch_rate + *report.yield_rate) / 2.0;
    report.outcomes = outcomes;
    return report;
}

EvalReport evaluate(const std::vector<PairManifestEntry>& manifest, const EvalConfig& cfg,
                    int worker_count) {
    cfg.validate();
    if (worker_count < 1) throw validation_error("worker_count must be >= 1");
    GateRuntime runtime(cfg.gate);
    std::vector<PairOutcome> outcomes(manifest.size());
    parallel_for(manifest.size(), worker_count, [&](std::size_t i) {
        const PairManifestEntry& e = manifest[i];
        LoadedPair p = load_pair(e);
        CycleRecord rec = runtime.gate(p.support_image, p.support_mask, p.query_image, e.pair_id);
        outcomes[i] = score_pair(e, rec, p.gt_mask ? &*p.gt_mask : nullptr, cfg);
    });
    return aggregate_outcomes(outcomes, cfg);
}

std::vector<std::pair<double, EvalReport>> sweep_thresholds(
    const std::vector<PairManifestEntry>& manifest, const EvalConfig& base_cfg,
    const std::vector<double>& taus, int worker_count) {
    base_cfg.validate();
    if (taus.empty()) throw validation_error("sweep: tau list must be non-empty");
    for (double t : taus)
        if (t < 0.0 || t > 1.0)
            throw validation_error("sweep: tau must be in [0,1], got " + std::to_string(t));

    GateRuntime runtime(base_cfg.gate);
    // Stage results do not depend on thresholds; compute each pair's cascade once.
    std::vector<std::vector<CycleRecord>> stage_results(manifest.size());
    std::vector<std::optional<BinaryMask>> gt_masks(manifest.size());
    parallel_for(manifest.size(), worker_count, [&](std::size_t i) {
        const PairManifestEntry& e = manifest[i];
        LoadedPair p = load_pair(e);
        stage_results[i] = runtime.run_all_stages(p.support_image, p.support_mask, p.query_image,
                                                  e.pair_id);
        gt_masks[i] = std::move(p.gt_mask);
    });

    std::vector<double> thresholds;
    for (const auto& stage : base_cfg.gate.stages) thresholds.push_back(stage.threshold);

    std::vector<std::pair<double, EvalReport>> result;
    result.reserve(taus.size());
    for (double tau : taus) {
        thresholds[0] = tau;
        EvalConfig cfg = base_cfg;
        cfg.gate.stages[0].threshold = tau;
        std::vector<PairOutcome> outcomes(manifest.size());
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            CycleRecord rec = decide_from_stages(stage_results[i], thresholds);
            outcomes[i] = score_pair(manifest[i], rec, gt_masks[i] ? &*gt_masks[i] : nullptr, cfg);
        }
        result.emplace_back(tau, aggregate_outcomes(outcomes, cfg));
    }
    return result;
}

std::string format_rate(const std::optional<double>& rate) {
    if (!rate) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", *rate);
    return buf;
}

nlohmann::ordered_json outcome_to_json(const PairOutcome& o) {
    nlohmann::ordered_json j;
    j["pair_id"] = o.pair_id;
    j["polarity"] = o.polarity == Polarity::Positive ? "positive" : "negative";
    j["stage_index"] = o.record.stage_index;
    j["forward_score"] = o.record.forward_score;
    j["reverse_score"] = o.record.reverse_score;
    j["miou"] = o.record.miou_value;
    j["confidence"] = o.record.confidence;
    j["decision"] = o.record.decision == Decision::Accepted ? "accepted" : "rejected";
    j["metric"] = o.metric;
    j["verdict"] = o.polarity == Polarity::Positive ? (o.correct ? "good-catch" : "miss")
                                                    : (o.correct ? "correct-yield" : "false-positive");
    return j;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json summary;
    summary["n_positive"] = report.n_positive;
    summary["n_negative"] = report.n_negative;
    auto rate_field = [](const std::optional<double>& rate) {
        return rate ? nlohmann::ordered_json(format_rate(rate)) : nlohmann::ordered_json(nullptr);
    };
    summary["catch_rate"] = rate_field(report.catch_rate);
    summary["yield_rate"] = rate_field(report.yield_rate);
    summary["pes"] = rate_field(report.pes);
    summary["stage1_threshold"] = report.stage1_threshold;

    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& o : report.outcomes) pairs.push_back(outcome_to_json(o));

    nlohmann::ordered_json j;
    j["summary"] = summary;
    j["pairs"] = pairs;
    return j;
}

std::string reports_to_csv(const std::vector<std::pair<double, EvalReport>>& rows) {
    std::string out = "tau,catch_rate,yield_rate,pes\n";
    char buf[32];
    for (const auto& [tau, report] : rows) {
        std::snprintf(buf, sizeof buf, "%.5f", tau);
        out += buf;
        out += "," + format_rate(report.catch_rate);
        out += "," + format_rate(report.yield_rate);
        out += "," + format_rate(report.pes);
        out += "\n";
    }
    return out;
}

}  // namespace cyclegate
