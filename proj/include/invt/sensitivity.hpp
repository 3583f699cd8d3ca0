#pragma once

#include "invt/transduction.hpp"

#include <array>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace invt {

/// The five axes of a sensitivity ordering.
enum class Axis { scale, rotation, translation, rg, yb };

inline constexpr std::array<Axis, 5> kAllAxes{Axis::scale, Axis::rotation, Axis::translation, Axis::rg, Axis::yb};

/// Short label: S, R, T, RG, YB.
std::string_view axis_label(Axis a) noexcept;
Axis parse_axis(std::string_view label);
bool is_geometric(Axis a) noexcept;

struct SensitivityRecord {
    std::string subject;  // "human" or a metric name
    Axis axis = Axis::scale;
    double sensitivity = 0.0;  // +inf when the threshold carries no energy
    std::string basis;         // "threshold-energy" or "slope"
};

/// 1 / mean rmse_energy(i, T(i)) over images and the given threshold specs
/// (symmetric directions of the same threshold). Zero energy gives +inf.
SensitivityRecord human_sensitivity(Axis axis, std::span<const TransformSpec> at_threshold,
                                    std::span<const ImageBuffer> images, const ViewingGeometry& geom);

/// Slope through the origin of the equalized response against energy, on the
/// `k` lowest positive-energy points of the curve.
double transduction_slope(const ResponseCurve& curve, std::size_t k = 5);

SensitivityRecord metric_sensitivity(Axis axis, const ResponseCurve& curve, std::size_t k = 5);

/// Axes sorted by decreasing sensitivity; ties keep kAllAxes order.
std::vector<Axis> ranked_axes(std::span<const SensitivityRecord> records);

/// "S>T>R>RG>YB".
std::string ordering_string(std::span<const Axis> order);

struct OrderingComparison {
    bool exact = false;
    std::size_t kendall_distance = 0;       // discordant pairs
    bool human_geometric_first = false;     // all geometric axes above both chromatic ones
    bool metric_geometric_first = false;
    bool geometric_order_match = false;     // relative order of S, R, T agrees
    bool rg_yb_match = false;               // relative order of RG and YB agrees
};

/// Both lists must rank the same set of axes.
OrderingComparison compare_orderings(std::span<const Axis> human, std::span<const Axis> metric);

}  // namespace invt
