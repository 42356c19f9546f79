#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cyclegate/eval.hpp"
#include "cyclegate/raster.hpp"

namespace cyclegate {

/// Desk-scale corpus: textured backgrounds with a planted ring-shaped defect.
/// Positive queries carry a translated copy of the support defect; negative
/// queries carry none. Backgrounds are smoothed noise, so template matching
/// against negatives produces spurious confident forward masks that fail the
/// reverse cycle.
struct SynthSpec {
    int n_positive = 10;
    int n_negative = 10;
    int image_size = 96;
    int patch_size = 20;
    std::uint64_t seed = 7;

    void validate() const;
};

/// Smoothed-noise background texture, deterministic in (seed, stream).
Raster synth_background(std::uint64_t seed, std::uint64_t stream, int size);

/// Support image with a planted defect and its mask, deterministic in the key.
std::pair<Raster, BinaryMask> synth_support(std::uint64_t seed, std::uint64_t stream, int size,
                                            int patch_size);

/// Writes the full corpus (images, masks, manifest.jsonl) under out_dir and
/// returns the manifest entries. Identical spec produces identical bytes.
std::vector<PairManifestEntry> generate_corpus(const SynthSpec& spec, const std::string& out_dir);

}  // namespace cyclegate
