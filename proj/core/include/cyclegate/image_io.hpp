#pragma once

#include <string>

#include "cyclegate/raster.hpp"

namespace cyclegate {

/// Loads an 8-bit PNG (gray or RGB) or binary PGM/PPM, chosen by file content.
Raster load_raster(const std::string& path);

/// Writes PNG when the path ends in .png, otherwise binary PGM (1ch) / PPM (3ch).
void save_raster(const Raster& r, const std::string& path);

/// Mask files are single-channel images; sample >= 128 decodes to foreground.
BinaryMask load_mask(const std::string& path);

/// Encodes foreground as 255, background as 0.
void save_mask(const BinaryMask& m, const std::string& path);

}  // namespace cyclegate
