#pragma once

#include "invt/color.hpp"
#include "invt/image.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace invt {

enum class Family { translation, rotation, scale, illuminant };

inline constexpr std::array<Family, 4> kAllFamilies{Family::translation, Family::rotation,
                                                    Family::scale, Family::illuminant};

std::string_view to_string(Family f) noexcept;
Family parse_family(std::string_view name);

/// Physical units of a family's intensity axis, for report annotations.
std::string_view family_units(Family f) noexcept;

/// Intensity value at which the family leaves the image unchanged.
double identity_theta(Family f) noexcept;

struct ViewingGeometry {
    double pixels_per_degree = 32.0;
};

/// One affine distortion.
///
/// `theta` is in family units: degrees of visual angle (translation), degrees of
/// arc (rotation), a dimensionless factor (scale) or the radius of the target
/// chromaticity from the white point in xy units (illuminant). `direction` is the
/// unit vector of the displacement in image coordinates (x right, y down) for
/// translation, and the hue direction in the xy plane for illuminant changes.
struct TransformSpec {
    Family family = Family::rotation;
    double theta = 0.0;
    std::array<double, 2> direction{1.0, 0.0};
    /// Index of the hue direction in the illuminant grid, -1 otherwise.
    int hue_index = -1;

    bool is_identity() const noexcept;
    Chromaticity illuminant_target() const noexcept;
    /// Intensity along the folded axis used by response curves: |theta| for
    /// rotation, theta otherwise. Symmetric directions share a folded value.
    double folded_theta() const noexcept;
    /// Throws ArgumentError when the transform violates its family's range.
    void validate() const;
};

std::string direction_label(const TransformSpec& spec);

/// Applies the distortion. Geometric families go through mosaic padding,
/// a bilinear inverse map and a centre crop, so the output has the input's
/// dimensions. Identity specs return the input unchanged.
ImageBuffer apply_transform(const ImageBuffer& img, const TransformSpec& spec,
                            const ViewingGeometry& geom);

/// Replaces every pixel by its luminance gray (computed in linear RGB).
ImageBuffer desaturate(const ImageBuffer& img);

/// Diagonal linear-RGB gains taking equal-energy white to `target` at constant Y.
Vec3 illuminant_gains(const Chromaticity& target);

/// Desaturates, then applies the illuminant gains; output is clipped to [0,1]
/// and keeps the input's encoding.
ImageBuffer apply_illuminant(const ImageBuffer& img, const Chromaticity& target);

struct GridConfig {
    double rotation_max = 10.0;
    double rotation_step = 0.1;
    double translation_max = 0.3;
    double translation_step = 0.01;
    double scale_min = 0.1;
    double scale_max = 2.0;
    int hues = 20;
    int saturations = 8;
    double saturation_max = 0.08;
};

/// Unit directions of the four translation axes: right, left, down, up.
const std::array<std::array<double, 2>, 4>& translation_directions();

/// xy-plane unit vector of hue `index` out of `hues`, angle measured from the x axis.
std::array<double, 2> hue_direction(int index, int hues);

/// Ordered grid of specs for one family. Rotation and translation grids
/// contain their identity once; scale grids contain only factors whose scaled
/// size rounds to an even number of pixels in both dimensions (plus the identity);
/// the illuminant grid holds hues x saturations specs without the identity.
std::vector<TransformSpec> theta_grid(Family family, const GridConfig& config, std::size_t width,
                                      std::size_t height);

}  // namespace invt
