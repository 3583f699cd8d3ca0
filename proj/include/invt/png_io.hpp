#pragma once

#include "invt/image.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace invt {

/// Reads an 8- or 16-bit PNG. Grayscale loads as one channel, colour as three;
/// alpha is discarded and palettes are expanded.
ImageBuffer load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (samples clamped to [0,1] and rounded). Linear images are
/// re-encoded to sRGB first.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

}  // namespace invt
