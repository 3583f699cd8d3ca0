#include "invt/pipeline.hpp"

#include "invt/artifacts.hpp"
#include "invt/csv.hpp"
#include "invt/error.hpp"
#include "invt/human_constants.hpp"
#include "invt/png_io.hpp"
#include "invt/report.hpp"
#include "invt/sensitivity.hpp"
#include "invt/trial_log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace invt {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCurves = "curves.json";
constexpr const char* kEqualization = "equalization.json";
constexpr const char* kHumanThreshold = "human_threshold.json";
constexpr const char* kThresholds = "thresholds.json";
constexpr const char* kEllipses = "ellipses.json";
constexpr const char* kSensitivity = "sensitivity.json";

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool has_family(const RunConfig& cfg, Family f) {
    return std::find(cfg.families.begin(), cfg.families.end(), f) != cfg.families.end();
}

ResponseOptions response_options(const RunConfig& cfg) { return {cfg.quantize, cfg.threads}; }

HumanConstants human_constants(const RunConfig& cfg) {
    return cfg.human_constants ? load_human_constants(*cfg.human_constants) : builtin_human_constants();
}

std::vector<ImageBuffer> buffers(const Dataset& ds) {
    std::vector<ImageBuffer> out;
    for (const auto& s : ds.images) out.push_back(s.image);
    return out;
}

std::vector<ImageBuffer> illuminant_bases(const std::vector<ImageBuffer>& images) {
    std::vector<ImageBuffer> out;
    for (const auto& img : images) out.push_back(desaturate(to_rgb(img)));
    return out;
}

int opposite_hue(int hue, int hues) { return (hue + hues / 2) % hues; }

std::vector<ResponseCurve> read_curves(const RunConfig& cfg) {
    const Json j = read_json(cfg.output_dir / kCurves);
    std::vector<ResponseCurve> out;
    for (const auto& c : j.at("curves")) out.push_back(curve_from_json(c));
    return out;
}

struct InternalThreshold {
    double d_tau, lo, hi;
};

InternalThreshold read_internal_threshold(const RunConfig& cfg) {
    const Json j = read_json(cfg.output_dir / kHumanThreshold);
    return {j.at("d_tau").get<double>(), j.at("d_tau_lo").get<double>(), j.at("d_tau_hi").get<double>()};
}

const ResponseCurve* find_curve(const std::vector<ResponseCurve>& curves, const std::string& dataset,
                                const std::string& metric, Family family, int hue = -1) {
    for (const auto& c : curves)
        if (c.dataset == dataset && c.metric == metric && c.family == family && c.hue_index == hue) return &c;
    return nullptr;
}

Json sensitivity_value(double s) { return std::isfinite(s) ? Json(s) : Json("inf"); }

double read_sensitivity(const Json& j) {
    return j.is_string() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

Dataset load_dataset(const DatasetConfig& config, std::uint64_t seed) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config.path)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("dataset '" + config.name + "' has no PNG images in " + config.path.string());
    if (files.size() > config.sample) {
        std::mt19937_64 rng(seed ^ fnv1a(config.name));
        std::shuffle(files.begin(), files.end(), rng);
        files.resize(config.sample);
        std::sort(files.begin(), files.end());
    }
    Dataset ds;
    ds.name = config.name;
    for (const auto& f : files) {
        ImageBuffer img = load_image(f);
        if (config.pad_to) img = pad_black(img, (*config.pad_to)[0], (*config.pad_to)[1]);
        if (!ds.images.empty() && (img.width() != ds.images.front().image.width() ||
                                   img.height() != ds.images.front().image.height()))
            throw Error("dataset '" + config.name + "': " + f.filename().string() +
                        " differs in size from the first image");
        ds.images.push_back({f.string(), std::move(img)});
    }
    return ds;
}

std::vector<RatedPair> load_rated_database(const fs::path& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read rated database " + csv_path.string());
    std::vector<std::string> f;
    if (!csv::read_row(in, f) || f != std::vector<std::string>{"reference", "distorted", "mos"})
        throw DecodeError(csv_path.string() + ": header must be reference,distorted,mos");
    const fs::path base = csv_path.parent_path();
    std::vector<RatedPair> out;
    while (csv::read_row(in, f)) {
        if (f.size() != 3) throw DecodeError(csv_path.string() + ": row " + std::to_string(out.size() + 1) + " needs 3 fields");
        const auto path = [&](const std::string& p) {
            const fs::path q(p);
            return (q.is_absolute() ? q : base / q).string();
        };
        out.push_back({path(f[0]), path(f[1]), csv::parse_double(f[2])});
    }
    if (out.empty()) throw DecodeError(csv_path.string() + ": no rated pairs");
    return out;
}

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"stimuli",  "respond",     "equalize",    "psychofit",
                                                "thresholds", "ellipses", "sensitivity", "report"};
    return names;
}

void stage_stimuli(const RunConfig& cfg) {
    for (const auto& dc : cfg.datasets) {
        const Dataset ds = load_dataset(dc, cfg.seed);
        write_stimuli(ds.images, cfg.families, cfg.grid, cfg.geometry, cfg.output_dir / "stimuli" / ds.name);
    }
}

void stage_respond(const RunConfig& cfg) {
    Json doc;
    doc["seed"] = cfg.seed;
    doc["pixels_per_degree"] = cfg.geometry.pixels_per_degree;
    doc["quantize"] = cfg.quantize;
    auto& arr = doc["curves"] = Json::array();
    const fs::path scratch = cfg.output_dir / "scratch";
    for (const auto& dc : cfg.datasets) {
        const Dataset ds = load_dataset(dc, cfg.seed);
        const auto images = buffers(ds);
        const std::size_t w = images.front().width(), h = images.front().height();
        std::vector<ImageBuffer> bases;
        if (has_family(cfg, Family::illuminant)) bases = illuminant_bases(images);
        for (const auto& handle : cfg.metrics) {
            if (handle.kind == MetricHandle::Kind::external) fs::create_directories(scratch);
            auto metric = make_metric(handle, scratch);
            for (Family f : cfg.families) {
                if (f == Family::illuminant) {
                    for (int hue = 0; hue < cfg.grid.hues; ++hue) {
                        ResponseCurve c = response_curve(*metric, bases, hue_grid(cfg.grid, hue), cfg.geometry,
                                                         response_options(cfg));
                        c.dataset = ds.name;
                        arr.push_back(to_json(c));
                    }
                } else {
                    const auto grid = theta_grid(f, cfg.grid, w, h);
                    ResponseCurve c = response_curve(*metric, images, grid, cfg.geometry, response_options(cfg));
                    c.dataset = ds.name;
                    arr.push_back(to_json(c));
                }
            }
        }
    }
    if (fs::exists(scratch) && fs::is_empty(scratch)) fs::remove(scratch);
    write_json(cfg.output_dir / kCurves, doc);
}

void stage_equalize(const RunConfig& cfg) {
    if (!cfg.rated_database) throw ConfigError("equalization needs a rated_database entry in the config");
    const auto pairs = load_rated_database(cfg.rated_database->csv);
    std::vector<double> mos;
    std::vector<PathPair> paths;
    for (const auto& p : pairs) {
        mos.push_back(p.mos);
        paths.push_back({p.reference, p.distorted});
    }
    const auto dmos = normalize_dmos(mos, cfg.rated_database->higher_is_better);

    Json doc;
    doc["database"] = cfg.rated_database->csv.string();
    doc["n_pairs"] = pairs.size();
    auto& fits = doc["fits"] = Json::object();
    std::map<std::string, EqualizationFit> by_metric;
    std::vector<std::vector<double>> columns;
    const fs::path scratch = cfg.output_dir / "scratch";
    for (const auto& handle : cfg.metrics) {
        auto metric = make_metric(handle, scratch);
        std::vector<double> d = batch_distances(*metric, paths);
        const EqualizationFit fit = fit_equalization(d, dmos);
        by_metric[handle.name] = fit;
        fits[handle.name] = to_json(fit);
        columns.push_back(std::move(d));
    }

    fs::create_directories(cfg.output_dir);
    std::ofstream table(cfg.output_dir / "rated_distances.csv", std::ios::binary | std::ios::trunc);
    std::vector<std::string> header{"reference", "distorted", "mos", "D"};
    for (const auto& m : cfg.metrics) header.push_back(m.name);
    csv::write_row(table, header);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::vector<std::string> row{pairs[i].reference, pairs[i].distorted, csv::format_double(pairs[i].mos),
                                     csv::format_double(dmos[i])};
        for (const auto& col : columns) row.push_back(csv::format_double(col[i]));
        csv::write_row(table, row);
    }
    write_json(cfg.output_dir / kEqualization, doc);

    Json curves = read_json(cfg.output_dir / kCurves);
    for (auto& c : curves.at("curves")) {
        const ResponseCurve raw = curve_from_json(c);
        const auto it = by_metric.find(raw.metric);
        if (it == by_metric.end()) throw Error("no equalization fit for metric '" + raw.metric + "'");
        c = to_json(transduce(raw, it->second));
    }
    write_json(cfg.output_dir / kCurves, curves);
}

void stage_psychofit(const RunConfig& cfg) {
    Json j;
    if (cfg.threshold.kind == ThresholdSourceConfig::Kind::builtin) {
        const HumanConstants hc = human_constants(cfg);
        j["source"] = "builtin";
        j["version"] = hc.version;
        j["d_tau"] = hc.d_tau;
        j["d_tau_lo"] = hc.d_tau_lo;
        j["d_tau_hi"] = hc.d_tau_hi;
    } else {
        std::vector<TrialRecord> trials;
        for (auto& t : read_trial_log(cfg.threshold.log))
            if (t.axis == "D") trials.push_back(std::move(t));
        if (trials.empty()) throw InsufficientDataError("trial log has no records on the D axis");
        PsychometricOptions opt;
        opt.bootstrap = cfg.threshold.bootstrap;
        opt.seed = cfg.seed;
        opt.threads = cfg.threads;
        const PsychometricFit fit = fit_psychometric(trials, opt);
        j["source"] = "log";
        j["log"] = cfg.threshold.log.string();
        j["d_tau"] = fit.tau;
        j["d_tau_lo"] = fit.quartile_lo;
        j["d_tau_hi"] = fit.quartile_hi;
        j["fit"] = to_json(fit);
    }
    write_json(cfg.output_dir / kHumanThreshold, j);
}

void stage_thresholds(const RunConfig& cfg) {
    const auto curves = read_curves(cfg);
    const InternalThreshold it = read_internal_threshold(cfg);
    const Json eq = read_json(cfg.output_dir / kEqualization);

    Json doc;
    doc["d_tau"] = it.d_tau;
    doc["d_tau_lo"] = it.lo;
    doc["d_tau_hi"] = it.hi;
    doc["pixels_per_degree"] = cfg.geometry.pixels_per_degree;
    auto& intervals = doc["intervals"] = Json::array();
    for (const auto& c : curves) {
        if (c.family == Family::illuminant) continue;
        ThresholdInterval t = invert_threshold(c, it.d_tau, it.lo, it.hi);
        t.pixels_per_degree = cfg.geometry.pixels_per_degree;
        intervals.push_back(to_json(t));
    }
    auto& units = doc["metric_units"] = Json::array();
    for (const auto& m : cfg.metrics) {
        const EqualizationFit fit = equalization_from_json(eq.at("fits").at(m.name));
        Json u;
        u["metric"] = m.name;
        u["a"] = fit.a;
        u["b"] = fit.b;
        u["d_tau"] = it.d_tau;
        u["threshold"] = metric_unit_threshold(fit, it.d_tau);
        u["threshold_lo"] = metric_unit_threshold(fit, it.lo);
        u["threshold_hi"] = metric_unit_threshold(fit, it.hi);
        units.push_back(u);
    }
    write_json(cfg.output_dir / kThresholds, doc);
}

void stage_ellipses(const RunConfig& cfg) {
    const InternalThreshold it = read_internal_threshold(cfg);
    Json doc;
    doc["d_tau"] = it.d_tau;
    auto& refs = doc["references"] = Json::array();
    for (const auto& r : cfg.reference_ellipses) refs.push_back({{"name", r.name}, {"ellipse", to_json(r.ellipse)}});
    auto& entries = doc["metrics"] = Json::array();
    if (!has_family(cfg, Family::illuminant)) {
        write_json(cfg.output_dir / kEllipses, doc);
        return;
    }
    const auto curves = read_curves(cfg);
    std::vector<std::pair<std::string, std::string>> groups;
    for (const auto& c : curves) {
        if (c.family != Family::illuminant) continue;
        const auto key = std::make_pair(c.dataset, c.metric);
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }
    for (const auto& [dataset, metric] : groups) {
        std::vector<ResponseCurve> hue_curves;
        for (const auto& c : curves)
            if (c.family == Family::illuminant && c.dataset == dataset && c.metric == metric) hue_curves.push_back(c);
        Json e;
        e["dataset"] = dataset;
        e["metric"] = metric;
        std::map<std::string, std::optional<Ellipse>> fitted;
        for (const auto& [label, level] : {std::pair<std::string, double>{"center", it.d_tau},
                                           {"lo", it.lo},
                                           {"hi", it.hi}}) {
            Json fj;
            fj["level"] = level;
            try {
                const MetricEllipse me = ellipse_from_curves(hue_curves, cfg.grid.hues, level);
                fj["ellipse"] = to_json(me.fit.ellipse);
                fj["residual"] = me.fit.residual;
                fj["hues"] = me.hues;
                fj["radii"] = me.radii;
                fj["dropped"] = me.dropped;
                fitted[label] = me.fit.ellipse;
            } catch (const InsufficientDataError& err) {
                fj["error"] = err.what();
                fitted[label] = std::nullopt;
            } catch (const FitError& err) {
                fj["error"] = err.what();
                fitted[label] = std::nullopt;
            }
            e[label] = fj;
        }
        auto& errors = e["errors"] = Json::array();
        for (const auto& r : cfg.reference_ellipses) {
            Json ej;
            ej["reference"] = r.name;
            const bool same_center = std::abs(r.ellipse.center.x - kWhitePoint.x) <= 1e-12 &&
                                     std::abs(r.ellipse.center.y - kWhitePoint.y) <= 1e-12;
            if (!same_center) {
                ej["note"] = "reference is not centred on the white point";
            } else if (!fitted["center"]) {
                ej["note"] = "open: fewer than 4 hue directions reach D_tau";
            } else {
                ej["error"] = ellipse_rmse(*fitted["center"], r.ellipse);
                std::vector<double> range;
                for (const char* q : {"lo", "hi"})
                    if (fitted[q]) range.push_back(ellipse_rmse(*fitted[q], r.ellipse));
                if (!range.empty()) {
                    ej["error_lo"] = *std::min_element(range.begin(), range.end());
                    ej["error_hi"] = *std::max_element(range.begin(), range.end());
                }
            }
            errors.push_back(ej);
        }
        entries.push_back(e);
    }
    write_json(cfg.output_dir / kEllipses, doc);
}

void stage_sensitivity(const RunConfig& cfg) {
    const HumanConstants hc = human_constants(cfg);
    const auto curves = read_curves(cfg);
    const Ellipse* human_ellipse = nullptr;
    for (const auto& r : cfg.reference_ellipses)
        if (r.name == cfg.sensitivity.human_ellipse) human_ellipse = &r.ellipse;
    const int hues = cfg.grid.hues;
    const auto hue_pair = [&](int hue) { return std::array<int, 2>{hue, opposite_hue(hue, hues)}; };

    Json doc;
    doc["k"] = cfg.sensitivity.k;
    doc["human_ellipse"] = cfg.sensitivity.human_ellipse;
    auto& datasets = doc["datasets"] = Json::array();
    for (const auto& dc : cfg.datasets) {
        const Dataset ds = load_dataset(dc, cfg.seed);
        const auto images = buffers(ds);

        std::vector<SensitivityRecord> human;
        const auto add_human = [&](Axis axis, const std::vector<TransformSpec>& specs,
                                   const std::vector<ImageBuffer>& imgs) {
            human.push_back(human_sensitivity(axis, specs, imgs, cfg.geometry));
        };
        if (const auto* t = hc.find(Family::translation); t && has_family(cfg, Family::translation)) {
            std::vector<TransformSpec> specs;
            for (const auto& d : translation_directions()) specs.push_back({Family::translation, t->natural, d});
            add_human(Axis::translation, specs, images);
        }
        if (const auto* t = hc.find(Family::rotation); t && has_family(cfg, Family::rotation))
            add_human(Axis::rotation, {{Family::rotation, t->natural}, {Family::rotation, -t->natural}}, images);
        if (const auto* t = hc.find(Family::scale); t && has_family(cfg, Family::scale))
            add_human(Axis::scale, {{Family::scale, t->natural}}, images);
        if (human_ellipse && has_family(cfg, Family::illuminant)) {
            const auto bases = illuminant_bases(images);
            for (const auto& [axis, hue] : {std::pair{Axis::rg, cfg.sensitivity.rg_hue},
                                            std::pair{Axis::yb, cfg.sensitivity.yb_hue}}) {
                std::vector<TransformSpec> specs;
                for (int hh : hue_pair(hue)) {
                    const auto dir = hue_direction(hh, hues);
                    specs.push_back({Family::illuminant, human_ellipse->radius(std::atan2(dir[1], dir[0])), dir, hh});
                }
                add_human(axis, specs, bases);
            }
        }
        std::vector<Axis> axes;
        for (const auto& r : human) axes.push_back(r.axis);
        const auto human_order = ranked_axes(human);

        Json dj;
        dj["dataset"] = ds.name;
        Json hj;
        auto& hrec = hj["records"] = Json::array();
        for (const auto& r : human)
            hrec.push_back({{"axis", std::string(axis_label(r.axis))},
                            {"sensitivity", sensitivity_value(r.sensitivity)},
                            {"energy", std::isfinite(r.sensitivity) ? 1.0 / r.sensitivity : 0.0},
                            {"basis", r.basis}});
        hj["ordering"] = ordering_string(human_order);
        dj["human"] = hj;

        auto& mj = dj["metrics"] = Json::array();
        for (const auto& m : cfg.metrics) {
            std::vector<SensitivityRecord> recs;
            for (Axis a : axes) {
                double s = 0.0;
                if (a == Axis::rg || a == Axis::yb) {
                    const int hue = a == Axis::rg ? cfg.sensitivity.rg_hue : cfg.sensitivity.yb_hue;
                    for (int hh : hue_pair(hue)) {
                        const auto* c = find_curve(curves, ds.name, m.name, Family::illuminant, hh);
                        if (!c) throw Error("missing illuminant curve for hue " + std::to_string(hh));
                        s += transduction_slope(*c, cfg.sensitivity.k) / 2.0;
                    }
                } else {
                    const Family f = a == Axis::scale      ? Family::scale
                                     : a == Axis::rotation ? Family::rotation
                                                           : Family::translation;
                    const auto* c = find_curve(curves, ds.name, m.name, f);
                    if (!c) throw Error("missing " + std::string(to_string(f)) + " curve for " + m.name);
                    s = transduction_slope(*c, cfg.sensitivity.k);
                }
                recs.push_back({m.name, a, s, "slope"});
            }
            const auto order = ranked_axes(recs);
            const OrderingComparison cmp = compare_orderings(human_order, order);
            Json one;
            one["metric"] = m.name;
            auto& rj = one["records"] = Json::array();
            for (const auto& r : recs)
                rj.push_back({{"axis", std::string(axis_label(r.axis))}, {"sensitivity", r.sensitivity}});
            one["ordering"] = ordering_string(order);
            one["comparison"] = {{"exact", cmp.exact},
                                 {"kendall_distance", cmp.kendall_distance},
                                 {"geometric_first", cmp.metric_geometric_first},
                                 {"geometric_order_match", cmp.geometric_order_match},
                                 {"rg_yb_match", cmp.rg_yb_match}};
            mj.push_back(one);
        }
        datasets.push_back(dj);
    }
    write_json(cfg.output_dir / kSensitivity, doc);
}

void stage_report(const RunConfig& cfg) {
    const HumanConstants hc = human_constants(cfg);
    const InternalThreshold it = read_internal_threshold(cfg);
    const Json th = read_json(cfg.output_dir / kThresholds);
    const Json el = read_json(cfg.output_dir / kEllipses);
    const Json se = read_json(cfg.output_dir / kSensitivity);
    const auto curves = read_curves(cfg);

    ReportTables t;
    std::vector<ThresholdInterval> intervals;
    for (const auto& j : th.at("intervals")) {
        intervals.push_back(interval_from_json(j));
        t.thresholds.push_back(make_threshold_row(intervals.back(), hc));
    }
    for (const auto& e : el.at("metrics")) {
        const auto& errors = e.at("errors");
        if (errors.empty()) {
            IlluminantRow r;
            r.dataset = e.at("dataset").get<std::string>();
            r.metric = e.at("metric").get<std::string>();
            r.note = e.at("center").contains("error") ? "open: fewer than 4 hue directions reach D_tau"
                                                      : "no reference ellipse configured";
            t.illuminant.push_back(r);
            continue;
        }
        for (const auto& x : errors) {
            IlluminantRow r;
            r.dataset = e.at("dataset").get<std::string>();
            r.metric = e.at("metric").get<std::string>();
            r.reference = x.at("reference").get<std::string>();
            if (x.contains("error")) r.error = x.at("error").get<double>();
            if (x.contains("error_lo")) r.error_lo = x.at("error_lo").get<double>();
            if (x.contains("error_hi")) r.error_hi = x.at("error_hi").get<double>();
            r.note = x.value("note", std::string());
            t.illuminant.push_back(r);
        }
    }
    mark_best_illuminant(t.illuminant);
    for (const auto& d : se.at("datasets")) {
        const std::string name = d.at("dataset").get<std::string>();
        const std::string human_order = d.at("human").at("ordering").get<std::string>();
        OrderingRow h;
        h.dataset = name;
        h.subject = "human";
        h.ordering = human_order;
        h.exact = true;
        h.geometric_order_match = true;
        h.rg_yb_match = true;
        {
            std::vector<SensitivityRecord> recs;
            for (const auto& r : d.at("human").at("records"))
                recs.push_back({"human", parse_axis(r.at("axis").get<std::string>()),
                                read_sensitivity(r.at("sensitivity")), ""});
            const auto order = ranked_axes(recs);
            h.geometric_first = compare_orderings(order, order).human_geometric_first;
        }
        t.orderings.push_back(h);
        for (const auto& m : d.at("metrics")) {
            const auto& c = m.at("comparison");
            t.orderings.push_back({name, m.at("metric").get<std::string>(), m.at("ordering").get<std::string>(),
                                   c.at("exact").get<bool>(), c.at("kendall_distance").get<std::size_t>(),
                                   c.at("geometric_first").get<bool>(), c.at("geometric_order_match").get<bool>(),
                                   c.at("rg_yb_match").get<bool>()});
        }
    }
    for (const auto& u : th.at("metric_units"))
        t.metric_units.push_back({u.at("metric").get<std::string>(), u.at("a").get<double>(), u.at("b").get<double>(),
                                  u.at("d_tau").get<double>(), u.at("threshold").get<double>(),
                                  u.at("threshold_lo").get<double>(), u.at("threshold_hi").get<double>()});
    write_report_files(t, cfg.output_dir / "report", it.d_tau, it.lo, it.hi, cfg.seed);

    const fs::path plots = cfg.output_dir / "plots";
    for (const auto& dc : cfg.datasets) {
        for (Family f : cfg.families)
            write_json(plots / ("curves_" + dc.name + "_" + std::string(to_string(f)) + ".json"),
                       curve_bundle(dc.name, f, curves, intervals, hc, it.d_tau));
        std::vector<EllipsePlotEntry> entries;
        for (const auto& r : cfg.reference_ellipses) entries.push_back({r.name, r.ellipse});
        for (const auto& e : el.at("metrics"))
            if (e.at("dataset") == dc.name && e.at("center").contains("ellipse"))
                entries.push_back({e.at("metric").get<std::string>(), ellipse_from_json(e.at("center").at("ellipse"))});
        write_json(plots / ("ellipses_" + dc.name + ".json"), ellipse_bundle(dc.name, entries));
    }
    for (const auto& d : se.at("datasets")) {
        const std::string name = d.at("dataset").get<std::string>();
        Json bundle;
        bundle["dataset"] = name;
        bundle["human"] = d.at("human");
        auto& series = bundle["series"] = Json::array();
        for (const auto& c : curves) {
            if (c.dataset != name) continue;
            series.push_back({{"metric", c.metric},
                              {"family", std::string(to_string(c.family))},
                              {"hue_index", c.hue_index},
                              {"energy", c.energy},
                              {"D", c.equalized ? Json(*c.equalized) : Json(nullptr)}});
        }
        write_json(plots / ("sensitivity_" + name + ".json"), bundle);
    }
}

void run_stage(const std::string& name, const RunConfig& cfg) {
    static const std::map<std::string, void (*)(const RunConfig&)> stages{
        {"stimuli", stage_stimuli},     {"respond", stage_respond},   {"equalize", stage_equalize},
        {"psychofit", stage_psychofit}, {"thresholds", stage_thresholds}, {"ellipses", stage_ellipses},
        {"sensitivity", stage_sensitivity}, {"report", stage_report}};
    const auto it = stages.find(name);
    if (it == stages.end()) throw ConfigError("unknown stage '" + name + "'");
    try {
        it->second(cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const MetricError& e) {
        throw StageError(name, std::string(e.what()) +
                                   (e.transcript().empty() ? "" : "\nadapter transcript:\n" + e.transcript()));
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

void run_pipeline(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir / "config.resolved.json", std::ios::binary | std::ios::trunc);
        out << config_to_json(cfg);
    }
    if (cfg.write_stimuli) run_stage("stimuli", cfg);
    for (const char* s : {"respond", "equalize", "psychofit", "thresholds", "ellipses", "sensitivity", "report"})
        run_stage(s, cfg);
}

}  // namespace invt
