#include "invt/error.hpp"
#include "invt/human_constants.hpp"
#include "invt/report.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace invt;

namespace {

ThresholdInterval interval(Family f, std::optional<double> c, std::optional<double> lo, std::optional<double> hi,
                           double theta_max) {
    ThresholdInterval t;
    t.family = f;
    t.metric = "rmse";
    t.dataset = "toy";
    t.center = c;
    t.lo = lo;
    t.hi = hi;
    t.theta_max = theta_max;
    t.pixels_per_degree = 32.0;
    return t;
}

ReportTables sample_tables() {
    const auto& human = builtin_human_constants();
    ReportTables t;
    t.thresholds.push_back(make_threshold_row(interval(Family::rotation, 3.1, 2.0, 4.0, 10.0), human));
    t.thresholds.push_back(make_threshold_row(interval(Family::translation, std::nullopt, 0.25, std::nullopt, 0.3), human));
    t.thresholds.push_back(make_threshold_row(interval(Family::scale, 1.0 / 3.0 + 0.7, 1.01, 1.2, 2.0), human));
    t.illuminant.push_back({"toy", "rmse", "ref, \"quoted\"", 0.0123456789012345, 0.01, 0.02, false, ""});
    t.illuminant.push_back({"toy", "ssim", "ref, \"quoted\"", std::nullopt, std::nullopt, std::nullopt, false,
                            "open: fewer than 4 hue directions reach D_tau"});
    mark_best_illuminant(t.illuminant);
    t.orderings.push_back({"toy", "human", "S>T>R", true, 0, true, true, true});
    t.orderings.push_back({"toy", "rmse", "T>S>R", false, 1, true, false, true});
    t.metric_units.push_back({"rmse", 2.5, 0.61, 0.44, 0.2251, 0.19, 0.27});
    return t;
}

}  // namespace

TEST_CASE("builtin human constants") {
    const auto& h = builtin_human_constants();
    CHECK(h.d_tau == 0.44);
    CHECK(h.d_tau_lo == 0.39);
    CHECK(h.d_tau_hi == 0.49);
    REQUIRE(h.find(Family::translation));
    CHECK(h.find(Family::translation)->literature == 0.024);
    CHECK(h.find(Family::translation)->natural == 0.23);
    CHECK(h.find(Family::translation)->natural_halfwidth == 0.10);
    CHECK(h.find(Family::rotation)->literature == 3.0);
    CHECK(h.find(Family::rotation)->natural == 3.6);
    CHECK(h.find(Family::rotation)->natural_halfwidth == 1.5);
    CHECK(h.find(Family::scale)->literature == 1.03);
    CHECK(h.find(Family::scale)->natural == 1.03);
    CHECK(h.find(Family::scale)->natural_halfwidth == 0.02);
    CHECK(h.find(Family::illuminant) == nullptr);
}

TEST_CASE("human constants parsing errors") {
    CHECK_THROWS_AS(parse_human_constants("{"), ConfigError);
    CHECK_THROWS_AS(parse_human_constants("{\"version\": 1}"), ConfigError);
    CHECK_THROWS_AS(load_human_constants("/nonexistent/h.json"), ConfigError);
}

TEST_CASE("match flags follow the interval bounds") {
    const auto& human = builtin_human_constants();
    const auto rot = make_threshold_row(interval(Family::rotation, 3.1, 2.0, 4.0, 10.0), human);
    CHECK(rot.literature_match);  // 3.0 in [2, 4]
    CHECK(rot.natural_match);     // 3.6 in [2, 4]
    const auto narrow = make_threshold_row(interval(Family::rotation, 3.1, 3.05, 3.2, 10.0), human);
    CHECK_FALSE(narrow.literature_match);
    CHECK_FALSE(narrow.natural_match);
    // Open-ended: lo missing reads as theta_max, hi as infinity.
    const auto open = make_threshold_row(interval(Family::translation, std::nullopt, std::nullopt, std::nullopt, 0.2), human);
    CHECK_FALSE(open.literature_match);
    CHECK(open.natural_match);
    CHECK(open.units == "deg visual angle");
    CHECK(open.human_literature == 0.024);
}

TEST_CASE("best illuminant per dataset and reference") {
    std::vector<IlluminantRow> rows{{"a", "m1", "r", 0.3, {}, {}, false, ""},
                                    {"a", "m2", "r", 0.1, {}, {}, false, ""},
                                    {"a", "m3", "r2", 0.5, {}, {}, false, ""},
                                    {"b", "m1", "r", 0.2, {}, {}, false, ""},
                                    {"a", "m4", "r", std::nullopt, {}, {}, false, "n"}};
    mark_best_illuminant(rows);
    CHECK_FALSE(rows[0].best_in_row);
    CHECK(rows[1].best_in_row);
    CHECK(rows[2].best_in_row);
    CHECK(rows[3].best_in_row);
    CHECK_FALSE(rows[4].best_in_row);
}

TEST_CASE("CSV tables round trip exactly") {
    const ReportTables t = sample_tables();
    CHECK(parse_thresholds_csv(thresholds_csv(t.thresholds)) == t.thresholds);
    CHECK(parse_illuminant_csv(illuminant_csv(t.illuminant)) == t.illuminant);
    CHECK(parse_orderings_csv(orderings_csv(t.orderings)) == t.orderings);
    CHECK(parse_metric_units_csv(metric_units_csv(t.metric_units)) == t.metric_units);

    const auto dir = testutil::tmp_dir("report_files");
    write_report_files(t, dir, 0.44, 0.39, 0.49, 1);
    CHECK(read_report_csv(dir) == t);
    for (const char* f : {"report.md", "thresholds.csv", "illuminant.csv", "orderings.csv", "metric_thresholds.csv"})
        CHECK(std::filesystem::exists(dir / f));
}

TEST_CASE("empty tables give header-only CSVs") {
    const ReportTables empty;
    for (const std::string& csv : {thresholds_csv({}), illuminant_csv({}), orderings_csv({}), metric_units_csv({})}) {
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
    }
    CHECK(parse_thresholds_csv(thresholds_csv({})).empty());
    const auto dir = testutil::tmp_dir("report_empty");
    write_report_files(empty, dir, 0.44, 0.39, 0.49, 1);
    CHECK(read_report_csv(dir) == empty);
}

TEST_CASE("CSV decoding errors") {
    CHECK_THROWS_AS(parse_thresholds_csv("nope\n"), DecodeError);
    std::string bad = metric_units_csv({{"m", 1, 1, 0.44, 0.1, 0.1, 0.1}});
    bad.replace(bad.find("m,1"), 3, "m,x");
    CHECK_THROWS_AS(parse_metric_units_csv(bad), DecodeError);
    std::string short_row = orderings_csv({}) + "toy,human\n";
    CHECK_THROWS_AS(parse_orderings_csv(short_row), DecodeError);
}

TEST_CASE("markdown marks open-ended cells") {
    const std::string md = render_markdown(sample_tables(), 0.44, 0.39, 0.49, 1);
    CHECK(md.find("(open)") != std::string::npos);
    CHECK(md.find("open: fewer than 4 hue directions reach D_tau") != std::string::npos);
    CHECK(md.find("S>T>R") != std::string::npos);
    CHECK(md == render_markdown(sample_tables(), 0.44, 0.39, 0.49, 1));
}

TEST_CASE("plot bundles") {
    ResponseCurve c;
    c.metric = "rmse";
    c.family = Family::rotation;
    c.dataset = "toy";
    c.thetas = {0.0, 1.0};
    c.raw = {0.0, 0.1};
    c.energy = {0.0, 0.1};
    c.equalized = std::vector<double>{0.0, 0.5};
    ResponseCurve other = c;
    other.dataset = "elsewhere";
    const auto j = curve_bundle("toy", Family::rotation, {c, other},
                                {interval(Family::rotation, 0.9, 0.8, 1.0, 1.0)}, builtin_human_constants(), 0.44);
    REQUIRE(j["series"].size() == 1);
    CHECK(j["series"][0]["threshold"]["center"].get<double>() == 0.9);
    CHECK(j["human"]["literature"].get<double>() == 3.0);
    CHECK_FALSE(j["series"][0].contains("hue_index"));

    const auto e = ellipse_bundle("toy", {{"rmse", Ellipse{kWhitePoint, 0.02, 0.01, 0.5}}});
    REQUIRE(e["ellipses"].size() == 1);
    CHECK(e["samples"].get<int>() == kEllipseSamples);
}
