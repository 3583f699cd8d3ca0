#pragma once

#include "invt/image.hpp"

namespace invt {

struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    int window = 11;
    double sigma = 1.5;
    double dynamic_range = 1.0;
};

/// Luminance plane in linear light: Y of linear RGB, or the linearised
/// channel for grayscale input.
ImageBuffer linear_luminance(const ImageBuffer& img);

/// Mean SSIM index over the valid (unpadded) window positions, computed on
/// linear luminance. Both images need at least window x window pixels.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});

}  // namespace invt
