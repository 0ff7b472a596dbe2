#pragma once

#include <filesystem>

#include "ldct/image.hpp"
#include "ldct/simulation.hpp"

namespace ldct {

// Binary layout shared by images and sinograms (little-endian):
//   char[4] magic, u32 rows, u32 cols, f32 spacing_mm, f32 data[rows * cols] (row-major)
// Images use magic "PHNT" (spacing = pixel size). Sinograms use "SINO"
// (rows = views, cols = channels, spacing = detector spacing) followed by a
// second f32 block of rows * cols statistical weights.

void write_image(const std::filesystem::path& path, const Image& img);
Image read_image(const std::filesystem::path& path);

void write_sinogram(const std::filesystem::path& path, const NoisySinogram& sino, double detector_spacing);
NoisySinogram read_sinogram(const std::filesystem::path& path);

/// Linear window mapping used by the PNG export: lo -> 0, hi -> 65535, clipped.
std::uint16_t window_level(double value, double lo, double hi);

/// 16-bit grayscale PNG of `img` under the window [lo, hi], plus a sidecar
/// `<path>.txt` recording the window and level. Default window is [800, 1200] HU.
void write_png16(const std::filesystem::path& path, const Image& img, double lo = 800.0, double hi = 1200.0);

}  // namespace ldct
