#pragma once

#include "invt/image.hpp"
#include "invt/metrics.hpp"
#include "invt/transforms.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace invt {

/// Mean metric response d_M(theta) over an image set, on the folded intensity axis.
struct ResponseCurve {
    std::string metric;
    Family family = Family::rotation;
    std::string dataset;
    int hue_index = -1;
    std::vector<double> thetas;  // strictly increasing
    std::vector<double> raw;     // mean distance per theta
    std::vector<double> energy;  // mean rmse_energy per theta
    std::optional<std::vector<double>> equalized;
    std::size_t n_images = 0;

    /// Position of the family's identity element; throws if absent.
    std::size_t identity_index() const;
    void validate() const;
};

/// Power-law map D = a * d^b from raw metric distances onto the normalized DMOS scale.
struct EqualizationFit {
    double a = 1.0;
    double b = 1.0;
    double residual = 0.0;  // RMS fit error over the pairs with d > 0
    std::size_t n_pairs = 0;

    double operator()(double d) const noexcept;
};

/// Intensity interval at which a metric's transduction reaches the human
/// internal threshold and its quartiles. An empty bound means the curve never
/// reached that level inside the sampled range (beyond `theta_max`).
struct ThresholdInterval {
    std::optional<double> center;
    std::optional<double> lo;
    std::optional<double> hi;
    double identity = 0.0;
    double theta_max = 0.0;
    std::string metric;
    Family family = Family::rotation;
    std::string dataset;
    double pixels_per_degree = 0.0;

    bool open_ended() const noexcept { return !hi.has_value(); }
    /// True when `value` lies in [lo, hi], with missing bounds read as
    /// lo = theta_max and hi = +infinity.
    bool contains(double value) const noexcept;
};

struct ResponseOptions {
    /// Round distorted stimuli to 8-bit levels, as they would be stored on disk.
    bool quantize = true;
    /// Worker threads for metrics that allow concurrent use; 0 picks the hardware count.
    unsigned threads = 0;
};

/// Evaluates d_M(theta) for each grid element, averaging over images and over
/// grid elements that share a folded intensity (symmetric directions).
ResponseCurve response_curve(Metric& metric, std::span<const ImageBuffer> images,
                             std::span<const TransformSpec> grid, const ViewingGeometry& geom,
                             const ResponseOptions& options = {});

/// Maps opinion scores to [0,1] with 0 = invisible and 1 = the largest
/// distortion. With `higher_is_better` (TID-style MOS): D = (max - mos)/(max - min).
std::vector<double> normalize_dmos(std::span<const double> mos, bool higher_is_better = true);

/// Log-log linear regression used to start the nonlinear fit.
EqualizationFit loglog_initial_fit(std::span<const double> d, std::span<const double> D);

/// Least-squares fit of D = a * d^b on the pairs with d > 0, started from the
/// log-log regression and refined by Levenberg-Marquardt on the original scale
/// with b constrained to [0.05, 5].
EqualizationFit fit_equalization(std::span<const double> d, std::span<const double> D);

/// Returns the curve with equalized[j] = a * raw[j]^b.
ResponseCurve transduce(const ResponseCurve& curve, const EqualizationFit& fit);

/// theta at which the isotonically smoothed values first reach `level`,
/// scanning upward from `start`; linear interpolation between samples.
std::optional<double> first_crossing(std::span<const double> thetas, std::span<const double> values,
                                     double level, std::size_t start = 0);

/// Inverts the equalized curve at D_tau and at the quartile levels.
ThresholdInterval invert_threshold(const ResponseCurve& curve, double d_tau, double d_tau_lo, double d_tau_hi);

/// d_tau^M = (D_tau / a)^(1/b), the threshold in the metric's own units.
double metric_unit_threshold(const EqualizationFit& fit, double d_tau);

}  // namespace invt
