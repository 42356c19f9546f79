#pragma once

#include <cstdint>
#include <vector>

#include "cyclegate/error.hpp"

namespace cyclegate {

/// 8-bit image, row-major, 1 (gray) or 3 (RGB) channels.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels);
    Raster(int width, int height, int channels, std::vector<std::uint8_t> samples);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }

    std::uint8_t at(int x, int y, int c = 0) const {
        return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    void set(int x, int y, int c, std::uint8_t v) {
        samples_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c] = v;
    }

    const std::vector<std::uint8_t>& samples() const { return samples_; }
    std::vector<std::uint8_t>& samples() { return samples_; }

    bool same_shape(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }
    bool operator==(const Raster& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> samples_;
};

/// Row-major boolean bitmap over the same pixel grid as a Raster.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<bool> bits);

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x]; }
    void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v; }

    const std::vector<bool>& bits() const { return bits_; }

    std::size_t foreground_count() const;
    bool empty_mask() const { return foreground_count() == 0; }

    bool same_shape(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool operator==(const BinaryMask& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<bool> bits_;
};

enum class MiouMode { ForegroundOnly, TwoClassMean };

/// |a∩b| / |a∪b|; 1.0 when both masks are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

/// ForegroundOnly equals iou; TwoClassMean averages foreground and background IoU.
double miou(const BinaryMask& a, const BinaryMask& b, MiouMode mode = MiouMode::ForegroundOnly);

/// Foreground pixel fraction of the mask.
double response_rate(const BinaryMask& m);

Raster resize_nearest(const Raster& r, int w, int h);
BinaryMask resize_nearest_mask(const BinaryMask& m, int w, int h);

Raster hflip(const Raster& r);
BinaryMask hflip_mask(const BinaryMask& m);

/// RGB to gray by channel averaging (round half away from zero); gray input is copied.
Raster to_gray(const Raster& r);

}  // namespace cyclegate
