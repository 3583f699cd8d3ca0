#pragma once

#include <array>

namespace invt {

/// CIE 1931 xy chromaticity.
struct Chromaticity {
    double x = 1.0 / 3.0;
    double y = 1.0 / 3.0;

    bool valid() const noexcept { return x > 0.0 && y > 0.0 && x + y < 1.0; }
    friend bool operator==(const Chromaticity&, const Chromaticity&) = default;
};

/// Equal-energy white, the assumed illuminant of every unmodified image.
inline constexpr Chromaticity kWhitePoint{1.0 / 3.0, 1.0 / 3.0};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// The working RGB space has sRGB primaries and an equal-energy white, so
// linear (1,1,1) sits exactly at (1/3, 1/3) with Y = 1.

/// Linear RGB -> XYZ.
const Mat3& rgb_to_xyz_matrix();
/// XYZ -> linear RGB.
const Mat3& xyz_to_rgb_matrix();

Vec3 mul(const Mat3& m, const Vec3& v) noexcept;

/// Relative luminance Y of a linear RGB triple.
double luminance(const Vec3& rgb) noexcept;

/// Chromaticity of a linear RGB triple (undefined for black).
Chromaticity rgb_chromaticity(const Vec3& rgb) noexcept;

/// Linear RGB of the colour with chromaticity `c` and luminance Y = 1.
Vec3 rgb_from_chromaticity(const Chromaticity& c) noexcept;

}  // namespace invt
