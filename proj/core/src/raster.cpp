#include "cyclegate/raster.hpp"

#include <cmath>
#include <string>

namespace cyclegate {

namespace {

std::string shape_string(int w, int h) {
    return std::to_string(w) + "x" + std::to_string(h);
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (!a.same_shape(b)) {
        throw validation_error(std::string(op) + ": mask dimension mismatch, " +
                               shape_string(a.width(), a.height()) + " vs " +
                               shape_string(b.width(), b.height()));
    }
}

}  // namespace

Raster::Raster(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels),
      samples_(static_cast<std::size_t>(width) * height * channels, 0) {
    if (width < 1 || height < 1) {
        throw validation_error("Raster: dimensions must be >= 1, got " + shape_string(width, height));
    }
    if (channels != 1 && channels != 3) {
        throw validation_error("Raster: channel count must be 1 or 3, got " + std::to_string(channels));
    }
}

Raster::Raster(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : Raster(width, height, channels) {
    if (samples.size() != samples_.size()) {
        throw validation_error("Raster: sample count " + std::to_string(samples.size()) +
                               " does not match " + shape_string(width, height) + "x" +
                               std::to_string(channels));
    }
    samples_ = std::move(samples);
}

BinaryMask::BinaryMask(int width, int height)
    : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, false) {
    if (width < 1 || height < 1) {
        throw validation_error("BinaryMask: dimensions must be >= 1, got " + shape_string(width, height));
    }
}

BinaryMask::BinaryMask(int width, int height, std::vector<bool> bits)
    : BinaryMask(width, height) {
    if (bits.size() != bits_.size()) {
        throw validation_error("BinaryMask: bit count " + std::to_string(bits.size()) +
                               " does not match " + shape_string(width, height));
    }
    bits_ = std::move(bits);
}

std::size_t BinaryMask::foreground_count() const {
    std::size_t n = 0;
    for (bool b : bits_) n += b ? 1 : 0;
    return n;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "iou");
    std::size_t inter = 0, uni = 0;
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        bool x = ab[i], y = bb[i];
        inter += (x && y) ? 1 : 0;
        uni += (x || y) ? 1 : 0;
    }
    if (uni == 0) return 1.0;  // both empty
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double miou(const BinaryMask& a, const BinaryMask& b, MiouMode mode) {
    require_same_shape(a, b, "miou");
    if (mode == MiouMode::ForegroundOnly) return iou(a, b);
    std::size_t fg_inter = 0, fg_uni = 0, bg_inter = 0, bg_uni = 0;
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        bool x = ab[i], y = bb[i];
        fg_inter += (x && y) ? 1 : 0;
        fg_uni += (x || y) ? 1 : 0;
        bg_inter += (!x && !y) ? 1 : 0;
        bg_uni += (!x || !y) ? 1 : 0;
    }
    double fg = fg_uni == 0 ? 1.0 : static_cast<double>(fg_inter) / fg_uni;
    double bg = bg_uni == 0 ? 1.0 : static_cast<double>(bg_inter) / bg_uni;
    return (fg + bg) / 2.0;
}

double response_rate(const BinaryMask& m) {
    return static_cast<double>(m.foreground_count()) / (static_cast<double>(m.width()) * m.height());
}

namespace {

// Nearest-neighbor source index: floor scaling, identity when sizes match.
int nn_index(int dst, int dst_size, int src_size) {
    return static_cast<int>((static_cast<std::int64_t>(dst) * src_size) / dst_size);
}

}  // namespace

Raster resize_nearest(const Raster& r, int w, int h) {
    if (w < 1 || h < 1) {
        throw validation_error("resize_nearest: target dimensions must be >= 1, got " +
                               std::to_string(w) + "x" + std::to_string(h));
    }
    if (w == r.width() && h == r.height()) return r;
    Raster out(w, h, r.channels());
    for (int y = 0; y < h; ++y) {
        int sy = nn_index(y, h, r.height());
        for (int x = 0; x < w; ++x) {
            int sx = nn_index(x, w, r.width());
            for (int c = 0; c < r.channels(); ++c) out.set(x, y, c, r.at(sx, sy, c));
        }
    }
    return out;
}

BinaryMask resize_nearest_mask(const BinaryMask& m, int w, int h) {
    if (w < 1 || h < 1) {
        throw validation_error("resize_nearest_mask: target dimensions must be >= 1, got " +
                               std::to_string(w) + "x" + std::to_string(h));
    }
    if (w == m.width() && h == m.height()) return m;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        int sy = nn_index(y, h, m.height());
        for (int x = 0; x < w; ++x) {
            out.set(x, y, m.at(nn_index(x, w, m.width()), sy));
        }
    }
    return out;
}

Raster hflip(const Raster& r) {
    Raster out(r.width(), r.height(), r.channels());
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            for (int c = 0; c < r.channels(); ++c)
                out.set(x, y, c, r.at(r.width() - 1 - x, y, c));
    return out;
}

BinaryMask hflip_mask(const BinaryMask& m) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            out.set(x, y, m.at(m.width() - 1 - x, y));
    return out;
}

Raster to_gray(const Raster& r) {
    if (r.channels() == 1) return r;
    Raster out(r.width(), r.height(), 1);
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            int sum = r.at(x, y, 0) + r.at(x, y, 1) + r.at(x, y, 2);
            out.set(x, y, 0, static_cast<std::uint8_t>(std::lround(sum / 3.0)));
        }
    }
    return out;
}

}  // namespace cyclegate
