#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclegate/gate.hpp"

namespace cyclegate {

enum class Polarity { Positive, Negative };

/// One evaluation unit from the manifest. Paths are resolved against the
/// manifest file's directory at load time.
struct PairManifestEntry {
    std::string pair_id;
    std::string support_image_path;
    std::string support_mask_path;
    std::string query_image_path;
    std::string gt_mask_path;  // required for positive pairs, empty for negative
    Polarity polarity = Polarity::Positive;
};

/// JSON Lines manifest: one entry per line with fields pair_id,
/// support_image_path, support_mask_path, query_image_path, gt_mask_path
/// (positives only), polarity. Entries keep manifest order.
std::vector<PairManifestEntry> load_manifest(const std::string& path);

struct EvalConfig {
    GateConfig gate;
    double catch_iou_threshold = 0.3;
    double yield_response_threshold = 0.0;

    void validate() const;
};

/// Per-pair scoring outcome. For positives, metric is IoU of the final mask
/// against ground truth; for negatives, the final mask's response rate.
struct PairOutcome {
    std::string pair_id;
    Polarity polarity = Polarity::Positive;
    double metric = 0.0;
    bool correct = false;  // good catch / correct yield
    CycleRecord record;
};

struct EvalReport {
    int n_positive = 0;
    int n_negative = 0;
    // A rate is reported only when its polarity is present in the manifest;
    // PES requires both.
    std::optional<double> catch_rate;
    std::optional<double> yield_rate;
    std::optional<double> pes;
    double stage1_threshold = 0.0;
    std::vector<PairOutcome> outcomes;
};

/// positive: good catch iff iou(final_mask, gt) >= catch_iou_threshold;
/// negative: correct yield iff response_rate(final_mask) <= yield_response_threshold.
PairOutcome score_pair(const PairManifestEntry& entry, const CycleRecord& record,
                       const BinaryMask* gt_mask, const EvalConfig& cfg);

/// Reduces per-pair outcomes to rates. catch_rate = good catches / positives,
/// yield_rate = correct yields / negatives, pes = their arithmetic mean;
/// a rate whose polarity is absent stays unset and PES is then undefined.
EvalReport aggregate_outcomes(const std::vector<PairOutcome>& outcomes, const EvalConfig& cfg);

/// Gates and scores every manifest pair. Deterministic: the report does not
/// depend on worker_count or completion order.
EvalReport evaluate(const std::vector<PairManifestEntry>& manifest, const EvalConfig& cfg,
                    int worker_count = 1);

/// Re-evaluates at each stage-1 threshold, reusing cached forward/reverse
/// results (per-pair p_c is threshold-independent, only decisions change).
/// Each report is identical to a fresh evaluate() run at that threshold.
std::vector<std::pair<double, EvalReport>> sweep_thresholds(
    const std::vector<PairManifestEntry>& manifest, const EvalConfig& base_cfg,
    const std::vector<double>& taus, int worker_count = 1);

/// Report serialization: a JSON document (summary + per-pair array), a CSV
/// summary row set (tau,catch_rate,yield_rate,pes, 5 decimal places), and one
/// JSON Lines record per pair.
nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string reports_to_csv(const std::vector<std::pair<double, EvalReport>>& rows);
nlohmann::ordered_json outcome_to_json(const PairOutcome& outcome);

/// Formats a rate with 5 decimal places ("n/a" when absent).
std::string format_rate(const std::optional<double>& rate);

}  // namespace cyclegate
