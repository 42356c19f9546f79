#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cyclegate/segmenter.hpp"

namespace cyclegate {

/// One cascade stage: a segmenter and its acceptance threshold on p_c.
struct GateStage {
    SegmenterSpec segmenter;
    double threshold = 0.18;
};

struct GateConfig {
    std::vector<GateStage> stages;
    MiouMode miou_mode = MiouMode::ForegroundOnly;

    void validate() const;
};

enum class Decision { Accepted, Rejected };

/// Full trace of one gated inference.
struct CycleRecord {
    std::string pair_id;
    int stage_index = 0;  // 1-based; the stage that decided (last stage if all reject)
    BinaryMask forward_mask;
    double forward_score = 0.0;
    BinaryMask reverse_mask;
    double reverse_score = 0.0;
    double miou_value = 0.0;
    double confidence = 0.0;  // p_c = forward_score * reverse_score * miou_value
    Decision decision = Decision::Rejected;
    BinaryMask final_mask;  // forward_mask when accepted, null mask when rejected
};

/// Prompt-conditioned inference on the query image: (m_f, p_f).
PromptResult forward_phase(const Segmenter& seg, const Raster& support_image,
                           const BinaryMask& support_mask, const Raster& query_image,
                           const std::string& pair_id = {});

/// Roles swapped: (query, m_f) prompts inference back onto the support image,
/// producing (m_r, p_r). An empty m_f short-circuits to (null mask, 0).
PromptResult reverse_phase(const Segmenter& seg, const Raster& query_image,
                           const BinaryMask& forward_mask, const Raster& support_image,
                           const std::string& pair_id = {});

/// p_c = p_f * p_r * miou(m_s, m_r, mode).
double confidence(double forward_score, double reverse_score, const BinaryMask& support_mask,
                  const BinaryMask& reverse_mask, MiouMode mode = MiouMode::ForegroundOnly);

/// A validated gate config with its segmenters constructed once; safe to share
/// across workers (segmenters are immutable after construction).
class GateRuntime {
public:
    explicit GateRuntime(GateConfig config);

    /// Uses caller-supplied segmenters (one per stage) instead of building
    /// them from the stage specs; the hook for wiring external models.
    GateRuntime(GateConfig config, std::vector<std::shared_ptr<const Segmenter>> segmenters);

    const GateConfig& config() const { return config_; }

    /// Runs the cascade: each stage computes forward, reverse, and p_c; the
    /// first stage whose p_c clears its threshold accepts its forward mask.
    /// If every stage rejects, the final mask is null (last stage reported).
    CycleRecord gate(const Raster& support_image, const BinaryMask& support_mask,
                     const Raster& query_image, const std::string& pair_id = {}) const;

    /// Runs every stage unconditionally; stage results are threshold-independent.
    /// decide_from_stages over these results reproduces gate() exactly.
    std::vector<CycleRecord> run_all_stages(const Raster& support_image,
                                            const BinaryMask& support_mask,
                                            const Raster& query_image,
                                            const std::string& pair_id = {}) const;

private:
    CycleRecord run_stage(std::size_t stage, const Raster& support_image,
                          const BinaryMask& support_mask, const Raster& query_image,
                          const std::string& pair_id) const;

    GateConfig config_;
    std::vector<std::shared_ptr<const Segmenter>> segmenters_;
};

/// One-shot convenience wrapper around GateRuntime.
CycleRecord gate(const GateConfig& config, const Raster& support_image,
                 const BinaryMask& support_mask, const Raster& query_image,
                 const std::string& pair_id = {});

/// Applies the cascade decision rule to precomputed stage results.
CycleRecord decide_from_stages(const std::vector<CycleRecord>& stage_results,
                               const std::vector<double>& thresholds);

}  // namespace cyclegate
