#include "invt/sensitivity.hpp"

#include "invt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace invt {

std::string_view axis_label(Axis a) noexcept {
    switch (a) {
    case Axis::scale: return "S";
    case Axis::rotation: return "R";
    case Axis::translation: return "T";
    case Axis::rg: return "RG";
    case Axis::yb: return "YB";
    }
    return "";
}

Axis parse_axis(std::string_view label) {
    for (Axis a : kAllAxes)
        if (axis_label(a) == label) return a;
    throw ArgumentError("unknown sensitivity axis '" + std::string(label) + "'");
}

bool is_geometric(Axis a) noexcept { return a != Axis::rg && a != Axis::yb; }

SensitivityRecord human_sensitivity(Axis axis, std::span<const TransformSpec> at_threshold,
                                    std::span<const ImageBuffer> images, const ViewingGeometry& geom) {
    if (at_threshold.empty() || images.empty()) throw ArgumentError("human_sensitivity needs specs and images");
    double sum = 0.0;
    for (const auto& img : images)
        for (const auto& spec : at_threshold) sum += rmse_energy(img, apply_transform(img, spec, geom));
    const double energy = sum / static_cast<double>(images.size() * at_threshold.size());
    SensitivityRecord r;
    r.subject = "human";
    r.axis = axis;
    r.sensitivity = energy > 0.0 ? 1.0 / energy : std::numeric_limits<double>::infinity();
    r.basis = "threshold-energy";
    return r;
}

double transduction_slope(const ResponseCurve& curve, std::size_t k) {
    if (!curve.equalized) throw ArgumentError("sensitivity needs an equalized curve");
    if (curve.energy.size() != curve.thetas.size()) throw ArgumentError("sensitivity needs per-theta energies");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < curve.energy.size(); ++i)
        if (curve.energy[i] > 0.0) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return curve.energy[a] < curve.energy[b]; });
    if (idx.size() > k) idx.resize(k);
    if (idx.size() < 3) throw InsufficientDataError("sensitivity slope needs 3 or more low-energy points");
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i : idx) {
        sxy += curve.energy[i] * (*curve.equalized)[i];
        sxx += curve.energy[i] * curve.energy[i];
    }
    const double slope = sxy / sxx;
    if (!std::isfinite(slope)) throw FitError("sensitivity slope is not finite");
    return slope;
}

SensitivityRecord metric_sensitivity(Axis axis, const ResponseCurve& curve, std::size_t k) {
    return {curve.metric, axis, transduction_slope(curve, k), "slope"};
}

std::vector<Axis> ranked_axes(std::span<const SensitivityRecord> records) {
    std::vector<SensitivityRecord> sorted(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.sensitivity != b.sensitivity) return a.sensitivity > b.sensitivity;
        return static_cast<int>(a.axis) < static_cast<int>(b.axis);
    });
    std::vector<Axis> out;
    for (const auto& r : sorted) out.push_back(r.axis);
    return out;
}

std::string ordering_string(std::span<const Axis> order) {
    std::string s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) s += '>';
        s += axis_label(order[i]);
    }
    return s;
}

namespace {

std::vector<int> positions(std::span<const Axis> order) {
    std::vector<int> pos(kAllAxes.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& p = pos[static_cast<std::size_t>(order[i])];
        if (p >= 0) throw ArgumentError("ordering lists an axis twice");
        p = static_cast<int>(i);
    }
    return pos;
}

bool geometric_first(std::span<const Axis> order) {
    bool seen_chromatic = false;
    for (Axis a : order) {
        if (!is_geometric(a)) seen_chromatic = true;
        else if (seen_chromatic) return false;
    }
    return true;
}

bool same_relative_order(const std::vector<int>& ph, const std::vector<int>& pm, std::initializer_list<Axis> axes) {
    for (Axis a : axes)
        for (Axis b : axes) {
            const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
            if (ph[ia] < 0 || ph[ib] < 0) continue;
            if ((ph[ia] < ph[ib]) != (pm[ia] < pm[ib])) return false;
        }
    return true;
}

}  // namespace

OrderingComparison compare_orderings(std::span<const Axis> human, std::span<const Axis> metric) {
    const auto ph = positions(human);
    const auto pm = positions(metric);
    for (std::size_t a = 0; a < ph.size(); ++a)
        if ((ph[a] < 0) != (pm[a] < 0)) throw ArgumentError("orderings rank different axis sets");
    OrderingComparison c;
    c.exact = std::equal(human.begin(), human.end(), metric.begin(), metric.end());
    for (std::size_t i = 0; i < human.size(); ++i)
        for (std::size_t j = i + 1; j < human.size(); ++j) {
            const auto a = static_cast<std::size_t>(human[i]), b = static_cast<std::size_t>(human[j]);
            if (pm[a] > pm[b]) ++c.kendall_distance;
        }
    c.human_geometric_first = geometric_first(human);
    c.metric_geometric_first = geometric_first(metric);
    c.geometric_order_match = same_relative_order(ph, pm, {Axis::scale, Axis::rotation, Axis::translation});
    c.rg_yb_match = same_relative_order(ph, pm, {Axis::rg, Axis::yb});
    return c;
}

}  // namespace invt
