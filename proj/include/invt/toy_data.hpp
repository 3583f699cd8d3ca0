#pragma once

#include "invt/image.hpp"

#include <cstdint>
#include <filesystem>

namespace invt {

/// Smooth coloured texture with a few hard-edged shapes, sRGB-encoded.
ImageBuffer procedural_image(std::size_t width, std::size_t height, std::uint64_t seed);

struct ToyDataOptions {
    std::size_t images = 10;
    std::size_t size = 64;
    std::uint64_t seed = 7;
};

/// Writes `dir/images/*.png`, a small rated database under `dir/rated/`
/// (ratings.csv with reference,distorted,mos; higher MOS is better) and a
/// builtins-only `dir/config.json` pointing at both. The config carries an
/// illustrative reference ellipse (not human data) so every report table is exercised.
void write_toy_data(const std::filesystem::path& dir, const ToyDataOptions& options = {});

}  // namespace invt
