#include "cyclegate/gate.hpp"

namespace cyclegate {

void GateConfig::validate() const {
    if (stages.empty()) throw validation_error("GateConfig: at least one stage required");
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (stages[i].threshold < 0.0 || stages[i].threshold > 1.0) {
            throw validation_error("GateConfig: stage " + std::to_string(i + 1) +
                                   " threshold must be in [0,1], got " +
                                   std::to_string(stages[i].threshold));
        }
    }
}

PromptResult forward_phase(const Segmenter& seg, const Raster& support_image,
                           const BinaryMask& support_mask, const Raster& query_image,
                           const std::string& pair_id) {
    PromptQuery q{support_image, support_mask, query_image};
    q.validate();
    return seg.segment(q, SegmentContext{pair_id, Direction::Forward});
}

PromptResult reverse_phase(const Segmenter& seg, const Raster& query_image,
                           const BinaryMask& forward_mask, const Raster& support_image,
                           const std::string& pair_id) {
    if (forward_mask.empty_mask()) {
        // An empty prompt cannot drive reverse inference; defined short-circuit.
        return {BinaryMask(support_image.width(), support_image.height()), 0.0};
    }
    PromptQuery q{query_image, forward_mask, support_image};
    q.validate();
    return seg.segment(q, SegmentContext{pair_id, Direction::Reverse});
}

double confidence(double forward_score, double reverse_score, const BinaryMask& support_mask,
                  const BinaryMask& reverse_mask, MiouMode mode) {
    return forward_score * reverse_score * miou(support_mask, reverse_mask, mode);
}

GateRuntime::GateRuntime(GateConfig config) : config_(std::move(config)) {
    config_.validate();
    segmenters_.reserve(config_.stages.size());
    for (const auto& stage : config_.stages) segmenters_.push_back(make_segmenter(stage.segmenter));
}

GateRuntime::GateRuntime(GateConfig config, std::vector<std::shared_ptr<const Segmenter>> segmenters)
    : config_(std::move(config)), segmenters_(std::move(segmenters)) {
    config_.validate();
    if (segmenters_.size() != config_.stages.size())
        throw validation_error("GateRuntime: segmenter count does not match stage count");
    for (const auto& s : segmenters_)
        if (!s) throw validation_error("GateRuntime: null segmenter");
}

CycleRecord GateRuntime::run_stage(std::size_t stage, const Raster& support_image,
                                   const BinaryMask& support_mask, const Raster& query_image,
                                   const std::string& pair_id) const {
    const Segmenter& seg = *segmenters_[stage];
    CycleRecord rec;
    rec.pair_id = pair_id;
    rec.stage_index = static_cast<int>(stage) + 1;

    PromptResult fwd = forward_phase(seg, support_image, support_mask, query_image, pair_id);
    rec.forward_mask = fwd.mask;
    rec.forward_score = fwd.score;

    PromptResult rev = reverse_phase(seg, query_image, fwd.mask, support_image, pair_id);
    rec.reverse_mask = rev.mask;
    rec.reverse_score = rev.score;

    rec.miou_value = miou(support_mask, rev.mask, config_.miou_mode);
    rec.confidence = rec.forward_score * rec.reverse_score * rec.miou_value;
    rec.final_mask = BinaryMask(query_image.width(), query_image.height());
    return rec;
}

CycleRecord GateRuntime::gate(const Raster& support_image, const BinaryMask& support_mask,
                              const Raster& query_image, const std::string& pair_id) const {
    CycleRecord rec;
    for (std::size_t i = 0; i < config_.stages.size(); ++i) {
        rec = run_stage(i, support_image, support_mask, query_image, pair_id);
        if (rec.confidence >= config_.stages[i].threshold) {
            rec.decision = Decision::Accepted;
            rec.final_mask = rec.forward_mask;
            return rec;
        }
        rec.decision = Decision::Rejected;  // final_mask already null
    }
    return rec;  // all stages rejected; record reports the last stage
}

std::vector<CycleRecord> GateRuntime::run_all_stages(const Raster& support_image,
                                                     const BinaryMask& support_mask,
                                                     const Raster& query_image,
                                                     const std::string& pair_id) const {
    std::vector<CycleRecord> out;
    out.reserve(config_.stages.size());
    for (std::size_t i = 0; i < config_.stages.size(); ++i)
        out.push_back(run_stage(i, support_image, support_mask, query_image, pair_id));
    return out;
}

CycleRecord gate(const GateConfig& config, const Raster& support_image,
                 const BinaryMask& support_mask, const Raster& query_image,
                 const std::string& pair_id) {
    return GateRuntime(config).gate(support_image, support_mask, query_image, pair_id);
}

CycleRecord decide_from_stages(const std::vector<CycleRecord>& stage_results,
                               const std::vector<double>& thresholds) {
    if (stage_results.empty() || stage_results.size() != thresholds.size())
        throw internal_error("decide_from_stages: stage/threshold count mismatch");
    for (std::size_t i = 0; i < stage_results.size(); ++i) {
        if (stage_results[i].confidence >= thresholds[i]) {
            CycleRecord rec = stage_results[i];
            rec.decision = Decision::Accepted;
            rec.final_mask = rec.forward_mask;
            return rec;
        }
    }
    CycleRecord rec = stage_results.back();
    rec.decision = Decision::Rejected;
    rec.final_mask = BinaryMask(rec.forward_mask.width(), rec.forward_mask.height());
    return rec;
}

}  // namespace cyclegate
