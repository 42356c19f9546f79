#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cyclegate/raster.hpp"

namespace cyclegate {

/// One prompt-conditioned segmentation request.
struct PromptQuery {
    Raster support_image;
    BinaryMask support_mask;  // non-empty
    Raster query_image;

    void validate() const;
};

/// Segmenter output: a mask over the query image and a top-1 confidence in [0,1].
struct PromptResult {
    BinaryMask mask;
    double score = 0.0;
};

enum class Direction { Forward, Reverse };

/// Identifies the pair and phase being segmented; the scripted segmenter keys
/// its lookup table on this, the reference segmenter ignores it.
struct SegmentContext {
    std::string pair_id;
    Direction direction = Direction::Forward;
};

enum class SegmenterKind { ReferenceNcc, Scripted, External };

/// Declarative segmenter selection; parameters are kind-specific.
struct SegmenterSpec {
    SegmenterKind kind = SegmenterKind::ReferenceNcc;
    std::map<std::string, std::string> parameters;
};

SegmenterKind parse_segmenter_kind(const std::string& name);
std::string segmenter_kind_name(SegmenterKind kind);

class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual PromptResult segment(const PromptQuery& q, const SegmentContext& ctx) const = 0;
};

/// Constructs the segmenter declared by the spec; validates parameters.
/// The "external" kind is a reserved tag and always raises unsupported-in-core.
std::shared_ptr<const Segmenter> make_segmenter(const SegmenterSpec& spec);

/// Zero-normalized cross-correlation of the patch at every valid placement
/// over the query. Output is (query_w - patch_w + 1) x (query_h - patch_h + 1),
/// row-major, values in [-1, 1]. Zero-variance patch or window correlates 0.
std::vector<double> ncc_response_map(const Raster& support_patch, const Raster& query,
                                     int* out_map_width = nullptr, int* out_map_height = nullptr);

/// Template matcher: crops the support-mask bounding box as a grayscale
/// template, scans the query with ZNCC, and stamps the template's mask shape
/// at every placement scoring >= relative_threshold * max response.
class NccSegmenter : public Segmenter {
public:
    NccSegmenter(double relative_threshold, double absolute_floor);

    PromptResult segment(const PromptQuery& q, const SegmentContext& ctx) const override;

    double relative_threshold() const { return relative_threshold_; }
    double absolute_floor() const { return absolute_floor_; }

private:
    double relative_threshold_;
    double absolute_floor_;
};

/// Table-driven segmenter for exact pipeline tests: echoes scripted
/// (mask, score) entries keyed by (pair_id, direction).
class ScriptedSegmenter : public Segmenter {
public:
    struct Entry {
        BinaryMask mask;
        double score = 0.0;
    };

    void add_entry(const std::string& pair_id, Direction dir, BinaryMask mask, double score);

    PromptResult segment(const PromptQuery& q, const SegmentContext& ctx) const override;

    /// Loads a JSON Lines table: {pair_id, direction, mask_path, score} per
    /// line, mask_path relative to the table file's directory.
    static std::shared_ptr<ScriptedSegmenter> load_table(const std::string& path);

private:
    std::map<std::pair<std::string, int>, Entry> table_;
};

}  // namespace cyclegate
