#pragma once

#include "invt/artifacts.hpp"
#include "invt/human_constants.hpp"
#include "invt/sensitivity.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace invt {

/// One (family, dataset, metric) cell of the threshold table.
struct ThresholdRow {
    std::string family;
    std::string dataset;
    std::string metric;
    std::string units;
    double pixels_per_degree = 0.0;
    std::optional<double> center;
    std::optional<double> lo;
    std::optional<double> hi;
    double theta_max = 0.0;
    std::optional<double> human_literature;
    std::optional<double> human_natural;
    bool literature_match = false;
    bool natural_match = false;

    bool operator==(const ThresholdRow&) const = default;
};

/// Ellipse error of one metric against one reference ellipse.
struct IlluminantRow {
    std::string dataset;
    std::string metric;
    std::string reference;
    std::optional<double> error;     // at D_tau
    std::optional<double> error_lo;  // smallest error over the D_tau quartile ellipses
    std::optional<double> error_hi;  // largest
    bool best_in_row = false;        // smallest error for this dataset and reference
    std::string note;

    bool operator==(const IlluminantRow&) const = default;
};

struct OrderingRow {
    std::string dataset;
    std::string subject;
    std::string ordering;  // e.g. "S>T>R>RG>YB"
    bool exact = false;
    std::size_t kendall_distance = 0;
    bool geometric_first = false;
    bool geometric_order_match = false;
    bool rg_yb_match = false;

    bool operator==(const OrderingRow&) const = default;
};

struct MetricUnitRow {
    std::string metric;
    double a = 0.0;
    double b = 0.0;
    double d_tau = 0.0;
    double threshold = 0.0;
    double threshold_lo = 0.0;
    double threshold_hi = 0.0;

    bool operator==(const MetricUnitRow&) const = default;
};

struct ReportTables {
    std::vector<ThresholdRow> thresholds;
    std::vector<IlluminantRow> illuminant;
    std::vector<OrderingRow> orderings;
    std::vector<MetricUnitRow> metric_units;

    bool operator==(const ReportTables&) const = default;
};

/// Match flags: literature iff the classical value lies in [lo, hi], natural iff
/// the natural-image value does (missing bounds read as in ThresholdInterval::contains).
ThresholdRow make_threshold_row(const ThresholdInterval& interval, const HumanConstants& human);

/// Sets best_in_row on the smallest error per (dataset, reference).
void mark_best_illuminant(std::vector<IlluminantRow>& rows);

std::string render_markdown(const ReportTables& tables, double d_tau, double d_tau_lo, double d_tau_hi,
                            std::uint64_t seed);

std::string thresholds_csv(const std::vector<ThresholdRow>& rows);
std::string illuminant_csv(const std::vector<IlluminantRow>& rows);
std::string orderings_csv(const std::vector<OrderingRow>& rows);
std::string metric_units_csv(const std::vector<MetricUnitRow>& rows);

std::vector<ThresholdRow> parse_thresholds_csv(const std::string& text);
std::vector<IlluminantRow> parse_illuminant_csv(const std::string& text);
std::vector<OrderingRow> parse_orderings_csv(const std::string& text);
std::vector<MetricUnitRow> parse_metric_units_csv(const std::string& text);

/// report.md plus one CSV per table.
void write_report_files(const ReportTables& tables, const std::filesystem::path& dir, double d_tau,
                        double d_tau_lo, double d_tau_hi, std::uint64_t seed);
ReportTables read_report_csv(const std::filesystem::path& dir);

/// Plot bundle for one (dataset, family): every metric's equalized curve on
/// the folded theta axis (including the identity point), its threshold
/// lines and the human reference values.
Json curve_bundle(const std::string& dataset, Family family, const std::vector<ResponseCurve>& curves,
                  const std::vector<ThresholdInterval>& intervals, const HumanConstants& human, double d_tau);

struct EllipsePlotEntry {
    std::string label;
    Ellipse ellipse;
};

/// Outlines sampled at kEllipseSamples polar angles.
Json ellipse_bundle(const std::string& dataset, const std::vector<EllipsePlotEntry>& entries);

}  // namespace invt
