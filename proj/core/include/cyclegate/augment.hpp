#pragma once

#include <cstdint>
#include <utility>

#include "cyclegate/raster.hpp"

namespace cyclegate {

/// Photometric-jitter + horizontal-flip policy with deterministic draws.
struct AugmentPolicy {
    double brightness_lo = 0.8, brightness_hi = 1.2;
    double contrast_lo = 0.8, contrast_hi = 1.2;
    double saturation_lo = 0.8, saturation_hi = 1.2;
    double hflip_probability = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// s -> clamp(round(s * factor), 0, 255) per sample.
Raster adjust_brightness(const Raster& r, double factor);

/// s -> clamp(round(mu + (s - mu) * factor), 0, 255), mu = mean sample value.
Raster adjust_contrast(const Raster& r, double factor);

/// Per pixel: g = round((r+g+b)/3), c -> clamp(round(g + (c - g) * factor), 0, 255).
/// Single-channel input is returned unchanged.
Raster adjust_saturation(const Raster& r, double factor);

/// Applies one policy draw keyed by (policy.seed, draw_index). Photometric ops
/// touch the image only; a flip is applied to image and mask together.
std::pair<Raster, BinaryMask> apply_policy(const Raster& r, const BinaryMask& m,
                                           const AugmentPolicy& policy, std::uint64_t draw_index);

}  // namespace cyclegate
