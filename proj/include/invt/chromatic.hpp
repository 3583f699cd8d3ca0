#pragma once

#include "invt/color.hpp"
#include "invt/transduction.hpp"

#include <array>
#include <span>
#include <vector>

namespace invt {

/// Discrimination ellipse in CIE xy around `center`.
struct Ellipse {
    Chromaticity center{kWhitePoint};
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0;  // radians of the major axis from the x axis, in [0, pi)

    /// Distance from the center to the boundary along polar angle phi.
    double radius(double phi) const noexcept;
    void validate() const;
};

struct EllipseFit {
    Ellipse ellipse;
    double residual = 0.0;  // RMS radial misfit of the input points
};

/// center + radius * direction for each (direction, radius).
std::vector<Chromaticity> radial_threshold_points(const Chromaticity& center,
                                                  std::span<const std::array<double, 2>> directions,
                                                  std::span<const double> radii);

/// Least-squares conic A u^2 + B u v + C v^2 = 1 in centred coordinates. With
/// antipodal points only two directions are independent; the minimum-norm conic
/// is taken, which resolves symmetric configurations to the axis-aligned solution.
EllipseFit fit_ellipse_fixed_center(std::span<const Chromaticity> points, const Chromaticity& center);

inline constexpr int kEllipseSamples = 360;

/// RMS of r1(phi) - r2(phi) over kEllipseSamples polar angles.
double ellipse_rmse(const Ellipse& e1, const Ellipse& e2);

Ellipse scale_ellipse(const Ellipse& e, double factor);

/// Boundary points at kEllipseSamples equally spaced polar angles.
std::vector<Chromaticity> ellipse_outline(const Ellipse& e, int samples = kEllipseSamples);

struct MetricEllipse {
    EllipseFit fit;
    std::vector<int> hues;        // hue indices that crossed the level
    std::vector<double> radii;    // threshold radius per surviving hue
    std::vector<int> dropped;     // hue indices whose curve never reached the level
};

/// Fits the ellipse through the radial thresholds of equalized per-hue curves
/// at `level`. Directions that never reach it are dropped; fewer than 4
/// survivors raise InsufficientDataError.
MetricEllipse ellipse_from_curves(std::span<const ResponseCurve> hue_curves, int hues, double level,
                                  const Chromaticity& center = kWhitePoint);

/// Builds the equalized per-hue curves for `metric` on `images` (3-channel,
/// already desaturated) and fits the ellipse at d_tau.
MetricEllipse metric_ellipse(Metric& metric, std::span<const ImageBuffer> images, const GridConfig& grid,
                             const ViewingGeometry& geom, const EqualizationFit& fit, double d_tau,
                             const ResponseOptions& options = {});

/// Per-hue illuminant grid including the identity (radius 0) element.
std::vector<TransformSpec> hue_grid(const GridConfig& grid, int hue);

}  // namespace invt
