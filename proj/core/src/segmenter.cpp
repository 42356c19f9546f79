#include "cyclegate/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cyclegate/image_io.hpp"

namespace cyclegate {

void PromptQuery::validate() const {
    if (support_image.width() != support_mask.width() ||
        support_image.height() != support_mask.height()) {
        throw validation_error("PromptQuery: support image and mask dimensions differ");
    }
    if (support_mask.empty_mask()) {
        throw validation_error("PromptQuery: support mask has no foreground pixels");
    }
}

SegmenterKind parse_segmenter_kind(const std::string& name) {
    if (name == "reference-ncc") return SegmenterKind::ReferenceNcc;
    if (name == "scripted") return SegmenterKind::Scripted;
    if (name == "external") return SegmenterKind::External;
    throw validation_error("unknown segmenter kind '" + name + "'");
}

std::string segmenter_kind_name(SegmenterKind kind) {
    switch (kind) {
        case SegmenterKind::ReferenceNcc: return "reference-ncc";
        case SegmenterKind::Scripted: return "scripted";
        case SegmenterKind::External: return "external";
    }
    return "?";
}

std::vector<double> ncc_response_map(const Raster& support_patch, const Raster& query,
                                     int* out_map_width, int* out_map_height) {
    Raster patch = to_gray(support_patch);
    Raster image = to_gray(query);
    int pw = patch.width(), ph = patch.height();
    int qw = image.width(), qh = image.height();
    if (pw > qw || ph > qh) {
        throw validation_error("ncc_response_map: patch " + std::to_string(pw) + "x" +
                               std::to_string(ph) + " exceeds query " + std::to_string(qw) + "x" +
                               std::to_string(qh));
    }
    int mw = qw - pw + 1, mh = qh - ph + 1;
    std::size_t n = static_cast<std::size_t>(pw) * ph;

    double patch_sum = 0.0, patch_sq = 0.0;
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) {
            double v = patch.at(x, y);
            patch_sum += v;
            patch_sq += v * v;
        }
    double patch_mean = patch_sum / n;
    double patch_var = patch_sq - patch_sum * patch_mean;

    std::vector<double> out(static_cast<std::size_t>(mw) * mh, 0.0);
    if (patch_var <= 0.0) {
        if (out_map_width) *out_map_width = mw;
        if (out_map_height) *out_map_height = mh;
        return out;  // constant patch: correlation defined as 0 everywhere
    }

    for (int oy = 0; oy < mh; ++oy) {
        for (int ox = 0; ox < mw; ++ox) {
            double win_sum = 0.0, win_sq = 0.0, cross = 0.0;
            for (int y = 0; y < ph; ++y) {
                for (int x = 0; x < pw; ++x) {
                    double w = image.at(ox + x, oy + y);
                    win_sum += w;
                    win_sq += w * w;
                    cross += w * patch.at(x, y);
                }
            }
            double win_var = win_sq - win_sum * win_sum / n;
            if (win_var <= 0.0) continue;  // constant window
            double cov = cross - win_sum * patch_mean;
            double r = cov / std::sqrt(patch_var * win_var);
            out[static_cast<std::size_t>(oy) * mw + ox] = std::clamp(r, -1.0, 1.0);
        }
    }
    if (out_map_width) *out_map_width = mw;
    if (out_map_height) *out_map_height = mh;
    return out;
}

namespace {

struct BBox {
    int x0, y0, x1, y1;  // inclusive
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

BBox mask_bbox(const BinaryMask& m) {
    BBox b{m.width(), m.height(), -1, -1};
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) {
                b.x0 = std::min(b.x0, x);
                b.y0 = std::min(b.y0, y);
                b.x1 = std::max(b.x1, x);
                b.y1 = std::max(b.y1, y);
            }
    return b;
}

}  // namespace

NccSegmenter::NccSegmenter(double relative_threshold, double absolute_floor)
    : relative_threshold_(relative_threshold), absolute_floor_(absolute_floor) {
    if (relative_threshold < 0.0 || relative_threshold > 1.0)
        throw validation_error("NccSegmenter: relative_threshold must be in [0,1]");
    if (absolute_floor < -1.0 || absolute_floor > 1.0)
        throw validation_error("NccSegmenter: absolute_floor must be in [-1,1]");
}

PromptResult NccSegmenter::segment(const PromptQuery& q, const SegmentContext&) const {
    q.validate();
    BBox box = mask_bbox(q.support_mask);

    Raster support_gray = to_gray(q.support_image);
    Raster patch(box.width(), box.height(), 1);
    BinaryMask patch_mask(box.width(), box.height());
    for (int y = 0; y < box.height(); ++y) {
        for (int x = 0; x < box.width(); ++x) {
            patch.set(x, y, 0, support_gray.at(box.x0 + x, box.y0 + y));
            patch_mask.set(x, y, q.support_mask.at(box.x0 + x, box.y0 + y));
        }
    }

    BinaryMask out(q.query_image.width(), q.query_image.height());
    if (patch.width() > q.query_image.width() || patch.height() > q.query_image.height()) {
        // template does not fit anywhere; treat as no match
        return {std::move(out), 0.0};
    }

    int mw = 0, mh = 0;
    std::vector<double> response = ncc_response_map(patch, q.query_image, &mw, &mh);
    double max_resp = *std::max_element(response.begin(), response.end());
    double score = (max_resp + 1.0) / 2.0;

    if (max_resp < absolute_floor_) return {std::move(out), score};

    double cut = relative_threshold_ * max_resp;
    for (int oy = 0; oy < mh; ++oy) {
        for (int ox = 0; ox < mw; ++ox) {
            if (response[static_cast<std::size_t>(oy) * mw + ox] < cut) continue;
            for (int y = 0; y < patch_mask.height(); ++y)
                for (int x = 0; x < patch_mask.width(); ++x)
                    if (patch_mask.at(x, y)) out.set(ox + x, oy + y, true);
        }
    }
    return {std::move(out), score};
}

void ScriptedSegmenter::add_entry(const std::string& pair_id, Direction dir, BinaryMask mask,
                                  double score) {
    if (score < 0.0 || score > 1.0)
        throw validation_error("scripted entry '" + pair_id + "': score must be in [0,1]");
    table_[{pair_id, static_cast<int>(dir)}] = Entry{std::move(mask), score};
}

PromptResult ScriptedSegmenter::segment(const PromptQuery& q, const SegmentContext& ctx) const {
    q.validate();
    auto it = table_.find({ctx.pair_id, static_cast<int>(ctx.direction)});
    if (it == table_.end()) {
        throw validation_error("scripted segmenter: no entry for pair '" + ctx.pair_id + "' " +
                               (ctx.direction == Direction::Forward ? "forward" : "reverse"));
    }
    return {it->second.mask, it->second.score};
}

std::shared_ptr<ScriptedSegmenter> ScriptedSegmenter::load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open scripted table " + path);
    auto seg = std::make_shared<ScriptedSegmenter>();
    std::filesystem::path base = std::filesystem::path(path).parent_path();
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
        std::string dir_name = j.at("direction").get<std::string>();
        Direction dir;
        if (dir_name == "forward") {
            dir = Direction::Forward;
        } else if (dir_name == "reverse") {
            dir = Direction::Reverse;
        } else {
            throw validation_error(path + ":" + std::to_string(lineno) +
                                   ": direction must be forward|reverse, got '" + dir_name + "'");
        }
        std::string mask_path = (base / j.at("mask_path").get<std::string>()).string();
        seg->add_entry(j.at("pair_id").get<std::string>(), dir, load_mask(mask_path),
                       j.at("score").get<double>());
    }
    return seg;
}

namespace {

double param_or(const SegmenterSpec& spec, const std::string& key, double fallback) {
    auto it = spec.parameters.find(key);
    if (it == spec.parameters.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw validation_error("segmenter parameter '" + key + "': not a number: '" + it->second + "'");
    }
}

}  // namespace

std::shared_ptr<const Segmenter> make_segmenter(const SegmenterSpec& spec) {
    switch (spec.kind) {
        case SegmenterKind::ReferenceNcc:
            return std::make_shared<NccSegmenter>(param_or(spec, "relative_threshold", 0.8),
                                                  param_or(spec, "absolute_floor", 0.2));
        case SegmenterKind::Scripted: {
            auto it = spec.parameters.find("table");
            if (it == spec.parameters.end())
                throw validation_error("scripted segmenter requires a 'table' parameter");
            return ScriptedSegmenter::load_table(it->second);
        }
        case SegmenterKind::External:
            throw validation_error(
                "segmenter kind 'external' is a reserved tag, unsupported in core");
    }
    throw internal_error("unreachable segmenter kind");
}

}  // namespace cyclegate
