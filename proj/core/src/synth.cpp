#include "cyclegate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cyclegate/image_io.hpp"
#include "cyclegate/rng.hpp"

namespace cyclegate {

namespace fs = std::filesystem;

namespace {

// Stream ids partition the per-corpus draw space.
constexpr std::uint64_t kStreamSupportBg = 1ull << 32;
constexpr std::uint64_t kStreamQueryBg = 2ull << 32;
constexpr std::uint64_t kStreamPlacement = 3ull << 32;

Raster box_blur(const Raster& r) {
    Raster out(r.width(), r.height(), 1);
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            int sum = 0, n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= r.width() || yy >= r.height()) continue;
                    sum += r.at(xx, yy);
                    ++n;
                }
            }
            out.set(x, y, 0, static_cast<std::uint8_t>(std::lround(static_cast<double>(sum) / n)));
        }
    }
    return out;
}

// Concentric-ring defect pattern over a disk mask. The ring period keeps the
// autocorrelation peak sharp (shift-by-one correlation well under the default
// relative threshold) while the pattern stays smooth enough to weakly
// correlate with the blurred backgrounds.
void plant_defect(Raster& image, BinaryMask& mask, int cx, int cy, int patch_size) {
    double radius = patch_size / 2.0 - 2.0;
    constexpr double kRingPeriod = 5.0;
    for (int dy = -patch_size / 2; dy < patch_size - patch_size / 2; ++dy) {
        for (int dx = -patch_size / 2; dx < patch_size - patch_size / 2; ++dx) {
            int x = cx + dx, y = cy + dy;
            if (x < 0 || y < 0 || x >= image.width() || y >= image.height()) continue;
            double r = std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
            if (r > radius) continue;
            double v = 128.0 + 110.0 * std::sin(2.0 * M_PI * r / kRingPeriod);
            image.set(x, y, 0, static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
            mask.set(x, y, true);
        }
    }
}

struct Placement {
    int cx, cy;
};

Placement random_center(CounterRng& rng, int size, int patch_size) {
    int margin = patch_size / 2 + 2;
    int span = size - 2 * margin;
    if (span <= 0) return {size / 2, size / 2};  // patch barely fits: center it
    return {margin + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span))),
            margin + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span)))};
}

}  // namespace

void SynthSpec::validate() const {
    if (n_positive < 0 || n_negative < 0)
        throw validation_error("SynthSpec: pair counts must be non-negative");
    if (image_size < 16) throw validation_error("SynthSpec: image_size must be >= 16");
    if (patch_size < 8 || patch_size > image_size / 2)
        throw validation_error("SynthSpec: patch_size must be in [8, image_size/2]");
}

Raster synth_background(std::uint64_t seed, std::uint64_t stream, int size) {
    CounterRng rng(seed, stream);
    Raster noise(size, size, 1);
    for (auto& s : noise.samples())
        s = static_cast<std::uint8_t>(rng.next_below(256));
    // Two blur passes give mid-frequency texture with enough structure for
    // spurious template matches.
    Raster blurred = box_blur(box_blur(noise));
    for (auto& s : blurred.samples()) {
        double v = 128.0 + (s - 128.0) * 1.6;
        s = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    return blurred;
}

std::pair<Raster, BinaryMask> synth_support(std::uint64_t seed, std::uint64_t stream, int size,
                                            int patch_size) {
    Raster image = synth_background(seed, kStreamSupportBg + stream, size);
    BinaryMask mask(size, size);
    CounterRng rng(seed, kStreamPlacement + stream);
    Placement p = random_center(rng, size, patch_size);
    plant_defect(image, mask, p.cx, p.cy, patch_size);
    return {std::move(image), std::move(mask)};
}

std::vector<PairManifestEntry> generate_corpus(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + out_dir + ": " + ec.message());

    std::vector<PairManifestEntry> entries;
    nlohmann::ordered_json manifest_lines = nlohmann::ordered_json::array();

    auto emit_pair = [&](const std::string& pair_id, std::uint64_t stream, bool positive) {
        auto [support, support_mask] = synth_support(spec.seed, stream, spec.image_size,
                                                     spec.patch_size);
        Raster query = synth_background(spec.seed, kStreamQueryBg + stream, spec.image_size);
        BinaryMask gt(spec.image_size, spec.image_size);
        if (positive) {
            // Copy the exact support defect pixels to a fresh location so the
            // forward phase can find them and the reverse phase can restore
            // the prompt.
            CounterRng rng(spec.seed, kStreamPlacement + stream + 1);
            Placement p = random_center(rng, spec.image_size, spec.patch_size);
            int sx0 = 0, sy0 = 0;
            // support defect bbox origin
            int min_x = spec.image_size, min_y = spec.image_size;
            for (int y = 0; y < spec.image_size; ++y)
                for (int x = 0; x < spec.image_size; ++x)
                    if (support_mask.at(x, y)) {
                        min_x = std::min(min_x, x);
                        min_y = std::min(min_y, y);
                    }
            sx0 = min_x;
            sy0 = min_y;
            for (int y = 0; y < spec.image_size; ++y) {
                for (int x = 0; x < spec.image_size; ++x) {
                    if (!support_mask.at(x, y)) continue;
                    int qx = p.cx - spec.patch_size / 2 + (x - sx0);
                    int qy = p.cy - spec.patch_size / 2 + (y - sy0);
                    if (qx < 0 || qy < 0 || qx >= spec.image_size || qy >= spec.image_size) continue;
                    query.set(qx, qy, 0, support.at(x, y));
                    gt.set(qx, qy, true);
                }
            }
        }

        std::string support_img = pair_id + "_support.png";
        std::string support_msk = pair_id + "_support_mask.png";
        std::string query_img = pair_id + "_query.png";
        std::string gt_msk = pair_id + "_gt.png";
        save_raster(support, (fs::path(out_dir) / support_img).string());
        save_mask(support_mask, (fs::path(out_dir) / support_msk).string());
        save_raster(query, (fs::path(out_dir) / query_img).string());
        if (positive) save_mask(gt, (fs::path(out_dir) / gt_msk).string());

        nlohmann::ordered_json j;
        j["pair_id"] = pair_id;
        j["polarity"] = positive ? "positive" : "negative";
        j["support_image_path"] = support_img;
        j["support_mask_path"] = support_msk;
        j["query_image_path"] = query_img;
        if (positive) j["gt_mask_path"] = gt_msk;
        manifest_lines.push_back(std::move(j));
    };

    char id[16];
    for (int i = 0; i < spec.n_positive; ++i) {
        std::snprintf(id, sizeof id, "p%03d", i);
        emit_pair(id, static_cast<std::uint64_t>(i) * 16, true);
    }
    for (int i = 0; i < spec.n_negative; ++i) {
        std::snprintf(id, sizeof id, "n%03d", i);
        emit_pair(id, (static_cast<std::uint64_t>(spec.n_positive + i)) * 16, false);
    }

    std::string manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw io_error("cannot write " + manifest_path);
    for (const auto& j : manifest_lines) out << j.dump() << "\n";
    out.close();

    return load_manifest(manifest_path);
}

}  // namespace cyclegate
