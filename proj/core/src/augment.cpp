#include "cyclegate/augment.hpp"

#include <cmath>
#include <string>

#include "cyclegate/rng.hpp"

namespace cyclegate {

namespace {

void require_positive_factor(double factor, const char* op) {
    if (!(factor > 0.0)) {
        throw validation_error(std::string(op) + ": factor must be positive, got " +
                               std::to_string(factor));
    }
}

std::uint8_t clamp_round(double v) {
    long r = std::lround(v);  // round half away from zero
    if (r < 0) return 0;
    if (r > 255) return 255;
    return static_cast<std::uint8_t>(r);
}

}  // namespace

void AugmentPolicy::validate() const {
    auto check_range = [](double lo, double hi, const char* name) {
        if (!(lo > 0.0) || !(lo <= hi)) {
            throw validation_error(std::string("AugmentPolicy.") + name +
                                   ": need 0 < lo <= hi, got [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");
        }
    };
    check_range(brightness_lo, brightness_hi, "brightness_range");
    check_range(contrast_lo, contrast_hi, "contrast_range");
    check_range(saturation_lo, saturation_hi, "saturation_range");
    if (hflip_probability < 0.0 || hflip_probability > 1.0) {
        throw validation_error("AugmentPolicy.hflip_probability: must be in [0,1], got " +
                               std::to_string(hflip_probability));
    }
}

Raster adjust_brightness(const Raster& r, double factor) {
    require_positive_factor(factor, "adjust_brightness");
    Raster out = r;
    for (auto& s : out.samples()) s = clamp_round(s * factor);
    return out;
}

Raster adjust_contrast(const Raster& r, double factor) {
    require_positive_factor(factor, "adjust_contrast");
    double sum = 0.0;
    for (auto s : r.samples()) sum += s;
    double mu = sum / static_cast<double>(r.samples().size());
    Raster out = r;
    for (auto& s : out.samples()) s = clamp_round(mu + (s - mu) * factor);
    return out;
}

Raster adjust_saturation(const Raster& r, double factor) {
    require_positive_factor(factor, "adjust_saturation");
    if (r.channels() == 1) return r;
    Raster out = r;
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            int sum = r.at(x, y, 0) + r.at(x, y, 1) + r.at(x, y, 2);
            double g = std::lround(sum / 3.0);
            for (int c = 0; c < 3; ++c) out.set(x, y, c, clamp_round(g + (r.at(x, y, c) - g) * factor));
        }
    }
    return out;
}

std::pair<Raster, BinaryMask> apply_policy(const Raster& r, const BinaryMask& m,
                                           const AugmentPolicy& policy, std::uint64_t draw_index) {
    policy.validate();
    if (r.width() != m.width() || r.height() != m.height()) {
        throw validation_error("apply_policy: image " + std::to_string(r.width()) + "x" +
                               std::to_string(r.height()) + " and mask " + std::to_string(m.width()) +
                               "x" + std::to_string(m.height()) + " dimension mismatch");
    }
    CounterRng rng(policy.seed, draw_index);
    // Draw order is part of the format: brightness, contrast, saturation, flip coin.
    double bf = rng.next_in(policy.brightness_lo, policy.brightness_hi);
    double cf = rng.next_in(policy.contrast_lo, policy.contrast_hi);
    double sf = rng.next_in(policy.saturation_lo, policy.saturation_hi);
    bool flip = rng.next_double() < policy.hflip_probability;

    Raster img = adjust_saturation(adjust_contrast(adjust_brightness(r, bf), cf), sf);
    BinaryMask mask = m;
    if (flip) {
        img = hflip(img);
        mask = hflip_mask(mask);
    }
    return {std::move(img), std::move(mask)};
}

}  // namespace cyclegate
