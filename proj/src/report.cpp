#include "invt/report.hpp"

#include "invt/csv.hpp"
#include "invt/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace invt {

namespace {

std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }
std::string flag(bool b) { return b ? "true" : "false"; }

std::optional<double> read_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return csv::parse_double(s);
}

bool read_flag(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw DecodeError("expected true or false, got '" + s + "'");
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    csv::write_row(os, header);
    for (const auto& r : rows) csv::write_row(os, r);
    return os.str();
}

std::vector<std::vector<std::string>> from_csv(const std::string& text, const std::vector<std::string>& header) {
    std::istringstream is(text);
    std::vector<std::string> fields;
    if (!csv::read_row(is, fields) || fields != header) throw DecodeError("unexpected CSV header");
    std::vector<std::vector<std::string>> rows;
    while (csv::read_row(is, fields)) {
        if (fields.size() != header.size())
            throw DecodeError("CSV row " + std::to_string(rows.size() + 1) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(header.size()));
        rows.push_back(fields);
    }
    return rows;
}

const std::vector<std::string> kThresholdHeader{
    "family",    "dataset",          "metric",        "units",           "pixels_per_degree",
    "center",    "lo",               "hi",            "theta_max",       "human_literature",
    "human_natural", "literature_match", "natural_match"};
const std::vector<std::string> kIlluminantHeader{"dataset", "metric",   "reference", "error", "error_lo",
                                                 "error_hi", "best_in_row", "note"};
const std::vector<std::string> kOrderingHeader{"dataset",         "subject",         "ordering",
                                               "exact",           "kendall_distance", "geometric_first",
                                               "geometric_order_match", "rg_yb_match"};
const std::vector<std::string> kMetricUnitHeader{"metric", "a", "b", "d_tau", "threshold", "threshold_lo",
                                                 "threshold_hi"};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string interval_cell(const ThresholdRow& r) {
    if (!r.center) return "> " + fmt(r.theta_max) + " (open)";
    std::string s = fmt(*r.center) + " [" + (r.lo ? fmt(*r.lo) : "> " + fmt(r.theta_max)) + ", " +
                    (r.hi ? fmt(*r.hi) : "open") + "]";
    return s;
}

}  // namespace

ThresholdRow make_threshold_row(const ThresholdInterval& t, const HumanConstants& human) {
    ThresholdRow r;
    r.family = std::string(to_string(t.family));
    r.dataset = t.dataset;
    r.metric = t.metric;
    r.units = std::string(family_units(t.family));
    r.pixels_per_degree = t.pixels_per_degree;
    r.center = t.center;
    r.lo = t.lo;
    r.hi = t.hi;
    r.theta_max = t.theta_max;
    if (const auto* h = human.find(t.family)) {
        r.human_literature = h->literature;
        r.human_natural = h->natural;
        r.literature_match = t.contains(h->literature);
        r.natural_match = t.contains(h->natural);
    }
    return r;
}

void mark_best_illuminant(std::vector<IlluminantRow>& rows) {
    std::map<std::pair<std::string, std::string>, double> best;
    for (const auto& r : rows) {
        if (!r.error) continue;
        auto key = std::make_pair(r.dataset, r.reference);
        auto it = best.find(key);
        if (it == best.end() || *r.error < it->second) best[key] = *r.error;
    }
    for (auto& r : rows) r.best_in_row = r.error && *r.error == best[{r.dataset, r.reference}];
}

std::string thresholds_csv(const std::vector<ThresholdRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.family, r.dataset, r.metric, r.units, csv::format_double(r.pixels_per_degree), opt(r.center),
                       opt(r.lo), opt(r.hi), csv::format_double(r.theta_max), opt(r.human_literature),
                       opt(r.human_natural), flag(r.literature_match), flag(r.natural_match)});
    return to_csv(kThresholdHeader, out);
}

std::vector<ThresholdRow> parse_thresholds_csv(const std::string& text) {
    std::vector<ThresholdRow> out;
    for (const auto& f : from_csv(text, kThresholdHeader))
        out.push_back({f[0], f[1], f[2], f[3], csv::parse_double(f[4]), read_opt(f[5]), read_opt(f[6]),
                       read_opt(f[7]), csv::parse_double(f[8]), read_opt(f[9]), read_opt(f[10]), read_flag(f[11]),
                       read_flag(f[12])});
    return out;
}

std::string illuminant_csv(const std::vector<IlluminantRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.dataset, r.metric, r.reference, opt(r.error), opt(r.error_lo), opt(r.error_hi),
                       flag(r.best_in_row), r.note});
    return to_csv(kIlluminantHeader, out);
}

std::vector<IlluminantRow> parse_illuminant_csv(const std::string& text) {
    std::vector<IlluminantRow> out;
    for (const auto& f : from_csv(text, kIlluminantHeader))
        out.push_back({f[0], f[1], f[2], read_opt(f[3]), read_opt(f[4]), read_opt(f[5]), read_flag(f[6]), f[7]});
    return out;
}

std::string orderings_csv(const std::vector<OrderingRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.dataset, r.subject, r.ordering, flag(r.exact), std::to_string(r.kendall_distance),
                       flag(r.geometric_first), flag(r.geometric_order_match), flag(r.rg_yb_match)});
    return to_csv(kOrderingHeader, out);
}

std::vector<OrderingRow> parse_orderings_csv(const std::string& text) {
    std::vector<OrderingRow> out;
    for (const auto& f : from_csv(text, kOrderingHeader))
        out.push_back({f[0], f[1], f[2], read_flag(f[3]), static_cast<std::size_t>(std::stoull(f[4])),
                       read_flag(f[5]), read_flag(f[6]), read_flag(f[7])});
    return out;
}

std::string metric_units_csv(const std::vector<MetricUnitRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.metric, csv::format_double(r.a), csv::format_double(r.b), csv::format_double(r.d_tau),
                       csv::format_double(r.threshold), csv::format_double(r.threshold_lo),
                       csv::format_double(r.threshold_hi)});
    return to_csv(kMetricUnitHeader, out);
}

std::vector<MetricUnitRow> parse_metric_units_csv(const std::string& text) {
    std::vector<MetricUnitRow> out;
    for (const auto& f : from_csv(text, kMetricUnitHeader))
        out.push_back({f[0], csv::parse_double(f[1]), csv::parse_double(f[2]), csv::parse_double(f[3]),
                       csv::parse_double(f[4]), csv::parse_double(f[5]), csv::parse_double(f[6])});
    return out;
}

std::string render_markdown(const ReportTables& t, double d_tau, double d_tau_lo, double d_tau_hi,
                            std::uint64_t seed) {
    std::ostringstream md;
    md << "# Invisibility thresholds\n\n";
    md << "Internal threshold D_tau = " << fmt(d_tau) << " [" << fmt(d_tau_lo) << ", " << fmt(d_tau_hi)
       << "] (normalized DMOS). Seed " << seed << ".\n\n";

    md << "## Threshold intervals\n\n";
    md << "Cells read `center [lo, hi]` in the family's units. `open` marks a curve that never reached the "
          "level inside the sampled range.\n\n";
    md << "| family | dataset | metric | interval | units | px/deg | human (literature) | human (natural) | "
          "literature match | natural match |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : t.thresholds)
        md << "| " << r.family << " | " << r.dataset << " | " << r.metric << " | " << interval_cell(r) << " | "
           << r.units << " | " << fmt(r.pixels_per_degree) << " | "
           << (r.human_literature ? fmt(*r.human_literature) : "-") << " | "
           << (r.human_natural ? fmt(*r.human_natural) : "-") << " | " << flag(r.literature_match) << " | "
           << flag(r.natural_match) << " |\n";

    md << "\n## Illuminant ellipse errors\n\n";
    md << "RMS radial difference in xy between the metric ellipse at D_tau and each reference ellipse; the "
          "range covers the ellipses at the D_tau quartiles.\n\n";
    md << "| dataset | metric | reference | error | range | best in row | note |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : t.illuminant)
        md << "| " << r.dataset << " | " << r.metric << " | " << r.reference << " | "
           << (r.error ? fmt(*r.error) : "-") << " | "
           << (r.error_lo && r.error_hi ? "[" + fmt(*r.error_lo) + ", " + fmt(*r.error_hi) + "]" : "-") << " | "
           << flag(r.best_in_row) << " | " << r.note << " |\n";

    md << "\n## Sensitivity orderings\n\n";
    md << "| dataset | subject | ordering | exact | Kendall distance | geometric first | geometric order match | "
          "RG/YB match |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : t.orderings)
        md << "| " << r.dataset << " | " << r.subject << " | " << r.ordering << " | " << flag(r.exact) << " | "
           << r.kendall_distance << " | " << flag(r.geometric_first) << " | " << flag(r.geometric_order_match)
           << " | " << flag(r.rg_yb_match) << " |\n";

    md << "\n## Metric-unit invisibility thresholds\n\n";
    md << "| metric | a | b | threshold | quartile range |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& r : t.metric_units)
        md << "| " << r.metric << " | " << fmt(r.a) << " | " << fmt(r.b) << " | " << fmt(r.threshold) << " | ["
           << fmt(r.threshold_lo) << ", " << fmt(r.threshold_hi) << "] |\n";
    return md.str();
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
    if (!out) throw Error("cannot write " + p.string());
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void write_report_files(const ReportTables& t, const std::filesystem::path& dir, double d_tau, double d_tau_lo,
                        double d_tau_hi, std::uint64_t seed) {
    write_text(dir / "report.md", render_markdown(t, d_tau, d_tau_lo, d_tau_hi, seed));
    write_text(dir / "thresholds.csv", thresholds_csv(t.thresholds));
    write_text(dir / "illuminant.csv", illuminant_csv(t.illuminant));
    write_text(dir / "orderings.csv", orderings_csv(t.orderings));
    write_text(dir / "metric_thresholds.csv", metric_units_csv(t.metric_units));
}

ReportTables read_report_csv(const std::filesystem::path& dir) {
    ReportTables t;
    t.thresholds = parse_thresholds_csv(read_text(dir / "thresholds.csv"));
    t.illuminant = parse_illuminant_csv(read_text(dir / "illuminant.csv"));
    t.orderings = parse_orderings_csv(read_text(dir / "orderings.csv"));
    t.metric_units = parse_metric_units_csv(read_text(dir / "metric_thresholds.csv"));
    return t;
}

Json curve_bundle(const std::string& dataset, Family family, const std::vector<ResponseCurve>& curves,
                  const std::vector<ThresholdInterval>& intervals, const HumanConstants& human, double d_tau) {
    Json j;
    j["dataset"] = dataset;
    j["family"] = std::string(to_string(family));
    j["units"] = std::string(family_units(family));
    j["d_tau"] = d_tau;
    if (const auto* h = human.find(family))
        j["human"] = {{"literature", h->literature}, {"natural", h->natural}, {"natural_halfwidth", h->natural_halfwidth}};
    auto& series = j["series"] = Json::array();
    for (const auto& c : curves) {
        if (c.dataset != dataset || c.family != family) continue;
        Json s;
        s["metric"] = c.metric;
        if (c.hue_index >= 0) s["hue_index"] = c.hue_index;
        s["theta"] = c.thetas;
        s["D"] = c.equalized ? Json(*c.equalized) : Json(nullptr);
        s["raw"] = c.raw;
        s["energy"] = c.energy;
        for (const auto& t : intervals)
            if (t.metric == c.metric && t.dataset == dataset && t.family == family)
                s["threshold"] = {{"center", t.center ? Json(*t.center) : Json(nullptr)},
                                  {"lo", t.lo ? Json(*t.lo) : Json(nullptr)},
                                  {"hi", t.hi ? Json(*t.hi) : Json(nullptr)}};
        series.push_back(s);
    }
    return j;
}

Json ellipse_bundle(const std::string& dataset, const std::vector<EllipsePlotEntry>& entries) {
    Json j;
    j["dataset"] = dataset;
    j["samples"] = kEllipseSamples;
    auto& arr = j["ellipses"] = Json::array();
    for (const auto& e : entries) {
        Json o;
        o["label"] = e.label;
        o["ellipse"] = to_json(e.ellipse);
        std::vector<double> xs, ys;
        for (const auto& p : ellipse_outline(e.ellipse)) {
            xs.push_back(p.x);
            ys.push_back(p.y);
        }
        o["x"] = xs;
        o["y"] = ys;
        arr.push_back(o);
    }
    return j;
}

}  // namespace invt
