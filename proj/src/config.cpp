#include "invt/config.hpp"

#include "invt/error.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace invt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

Ellipse parse_ellipse(const json& j) {
    Ellipse e;
    const auto c = j.at("center").get<std::vector<double>>();
    if (c.size() != 2) throw ConfigError("ellipse center must be [x, y]");
    e.center = {c[0], c[1]};
    e.semi_major = j.at("semi_major").get<double>();
    e.semi_minor = j.at("semi_minor").get<double>();
    e.angle = j.at("angle").get<double>();
    try {
        e.validate();
    } catch (const ArgumentError& err) {
        throw ConfigError(err.what());
    }
    return e;
}

MetricHandle parse_metric(const json& j) {
    if (j.is_string()) return builtin_metric(j.get<std::string>());
    check_keys(j, {"name", "command", "polarity", "timeout_s"}, "metric");
    const auto name = j.at("name").get<std::string>();
    if (!j.contains("command")) return builtin_metric(name);
    MetricHandle h = external_metric(name, j.at("command").get<std::vector<std::string>>());
    if (j.contains("polarity")) {
        const auto p = j.at("polarity").get<std::string>();
        if (p == "distance") h.polarity = Polarity::distance;
        else if (p == "similarity") h.polarity = Polarity::similarity;
        else throw ConfigError("metric polarity must be distance or similarity");
    }
    if (j.contains("timeout_s"))
        h.timeout = std::chrono::milliseconds(static_cast<long long>(j.at("timeout_s").get<double>() * 1000.0));
    return h;
}

}  // namespace

std::vector<NamedEllipse> load_reference_ellipses(const fs::path& path) {
    std::vector<NamedEllipse> out;
    try {
        const auto j = json::parse(read_text(path));
        for (const auto& e : j.at("ellipses")) out.push_back({e.at("name").get<std::string>(), parse_ellipse(e)});
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return out;
}

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    RunConfig cfg;
    try {
        const auto j = json::parse(json_text);
        check_keys(j,
                   {"datasets", "rated_database", "metrics", "families", "grid", "geometry", "threshold",
                    "human_constants", "reference_ellipses", "sensitivity", "output_dir", "seed", "quantize",
                    "write_stimuli", "threads"},
                   "config");
        for (const auto& d : j.at("datasets")) {
            check_keys(d, {"name", "path", "sample", "pad_to"}, "dataset");
            DatasetConfig ds;
            ds.path = resolve(base_dir, d.at("path").get<std::string>());
            ds.name = d.value("name", ds.path.filename().string());
            ds.sample = d.value("sample", std::size_t{250});
            if (d.contains("pad_to") && !d.at("pad_to").is_null()) {
                const auto p = d.at("pad_to").get<std::vector<std::size_t>>();
                if (p.size() != 2) throw ConfigError("pad_to must be [width, height]");
                ds.pad_to = std::array<std::size_t, 2>{p[0], p[1]};
            }
            cfg.datasets.push_back(ds);
        }
        if (j.contains("rated_database")) {
            const auto& r = j.at("rated_database");
            check_keys(r, {"csv", "higher_is_better"}, "rated_database");
            cfg.rated_database = RatedDatabaseConfig{resolve(base_dir, r.at("csv").get<std::string>()),
                                                     r.value("higher_is_better", true)};
        }
        for (const auto& m : j.at("metrics")) cfg.metrics.push_back(parse_metric(m));
        if (j.contains("families")) {
            cfg.families.clear();
            for (const auto& f : j.at("families")) cfg.families.push_back(parse_family(f.get<std::string>()));
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            check_keys(g,
                       {"rotation_max", "rotation_step", "translation_max", "translation_step", "scale_min",
                        "scale_max", "hues", "saturations", "saturation_max"},
                       "grid");
            auto& c = cfg.grid;
            c.rotation_max = g.value("rotation_max", c.rotation_max);
            c.rotation_step = g.value("rotation_step", c.rotation_step);
            c.translation_max = g.value("translation_max", c.translation_max);
            c.translation_step = g.value("translation_step", c.translation_step);
            c.scale_min = g.value("scale_min", c.scale_min);
            c.scale_max = g.value("scale_max", c.scale_max);
            c.hues = g.value("hues", c.hues);
            c.saturations = g.value("saturations", c.saturations);
            c.saturation_max = g.value("saturation_max", c.saturation_max);
        }
        if (j.contains("geometry")) {
            check_keys(j.at("geometry"), {"pixels_per_degree"}, "geometry");
            cfg.geometry.pixels_per_degree =
                j.at("geometry").value("pixels_per_degree", cfg.geometry.pixels_per_degree);
        }
        if (j.contains("threshold")) {
            const auto& t = j.at("threshold");
            check_keys(t, {"source", "log", "bootstrap"}, "threshold");
            const auto src = t.value("source", std::string("builtin"));
            if (src == "builtin") {
                cfg.threshold.kind = ThresholdSourceConfig::Kind::builtin;
            } else if (src == "log") {
                cfg.threshold.kind = ThresholdSourceConfig::Kind::log;
                cfg.threshold.log = resolve(base_dir, t.at("log").get<std::string>());
            } else {
                throw ConfigError("threshold source must be builtin or log");
            }
            cfg.threshold.bootstrap = t.value("bootstrap", cfg.threshold.bootstrap);
        }
        if (j.contains("human_constants"))
            cfg.human_constants = resolve(base_dir, j.at("human_constants").get<std::string>());
        if (j.contains("reference_ellipses")) {
            const auto& r = j.at("reference_ellipses");
            if (r.is_string()) {
                cfg.reference_ellipses = load_reference_ellipses(resolve(base_dir, r.get<std::string>()));
            } else {
                for (const auto& e : r) cfg.reference_ellipses.push_back({e.at("name").get<std::string>(), parse_ellipse(e)});
            }
        }
        if (j.contains("sensitivity")) {
            const auto& s = j.at("sensitivity");
            check_keys(s, {"k", "rg_hue", "yb_hue", "human_ellipse"}, "sensitivity");
            cfg.sensitivity.k = s.value("k", cfg.sensitivity.k);
            cfg.sensitivity.rg_hue = s.value("rg_hue", cfg.sensitivity.rg_hue);
            cfg.sensitivity.yb_hue = s.value("yb_hue", cfg.sensitivity.yb_hue);
            cfg.sensitivity.human_ellipse = s.value("human_ellipse", std::string());
        }
        if (j.contains("output_dir")) cfg.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        else cfg.output_dir = resolve(base_dir, "invt-out");
        cfg.seed = j.value("seed", cfg.seed);
        cfg.quantize = j.value("quantize", cfg.quantize);
        cfg.write_stimuli = j.value("write_stimuli", cfg.write_stimuli);
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    RunConfig cfg = parse_config(read_text(path), fs::absolute(path).parent_path());
    cfg.source = path;
    return cfg;
}

void RunConfig::validate() const {
    if (datasets.empty()) throw ConfigError("config lists no datasets");
    for (const auto& d : datasets) {
        if (!fs::is_directory(d.path)) throw ConfigError("dataset directory not found: " + d.path.string());
        if (d.sample == 0) throw ConfigError("dataset " + d.name + ": sample must be positive");
        for (const auto& o : datasets)
            if (&o != &d && o.name == d.name) throw ConfigError("duplicate dataset name " + d.name);
    }
    if (rated_database && !fs::is_regular_file(rated_database->csv))
        throw ConfigError("rated database not found: " + rated_database->csv.string());
    if (metrics.empty()) throw ConfigError("config lists no metrics");
    for (const auto& m : metrics) {
        m.validate();
        for (const auto& o : metrics)
            if (&o != &m && o.name == m.name) throw ConfigError("duplicate metric name " + m.name);
    }
    if (families.empty()) throw ConfigError("config lists no families");
    if (!(geometry.pixels_per_degree > 0.0)) throw ConfigError("pixels_per_degree must be positive");
    if (threshold.kind == ThresholdSourceConfig::Kind::log && !fs::is_regular_file(threshold.log))
        throw ConfigError("trial log not found: " + threshold.log.string());
    if (human_constants && !fs::is_regular_file(*human_constants))
        throw ConfigError("human constants file not found: " + human_constants->string());
    if (sensitivity.k < 3) throw ConfigError("sensitivity k must be at least 3");
    for (int h : {sensitivity.rg_hue, sensitivity.yb_hue})
        if (h < 0 || h >= grid.hues) throw ConfigError("sensitivity hue index out of range");
    if (!sensitivity.human_ellipse.empty()) {
        bool found = false;
        for (const auto& e : reference_ellipses) found = found || e.name == sensitivity.human_ellipse;
        if (!found) throw ConfigError("human_ellipse names no reference ellipse: " + sensitivity.human_ellipse);
    }
    // Grids are checked by building them once.
    for (Family f : families) {
        try {
            (void)theta_grid(f, grid, 64, 64);
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
}

std::string config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    auto& ds = j["datasets"] = nlohmann::ordered_json::array();
    for (const auto& d : cfg.datasets) {
        nlohmann::ordered_json o;
        o["name"] = d.name;
        o["path"] = d.path.string();
        o["sample"] = d.sample;
        if (d.pad_to) o["pad_to"] = {(*d.pad_to)[0], (*d.pad_to)[1]};
        ds.push_back(o);
    }
    if (cfg.rated_database)
        j["rated_database"] = {{"csv", cfg.rated_database->csv.string()},
                               {"higher_is_better", cfg.rated_database->higher_is_better}};
    auto& ms = j["metrics"] = nlohmann::ordered_json::array();
    for (const auto& m : cfg.metrics) {
        nlohmann::ordered_json o;
        o["name"] = m.name;
        if (m.kind == MetricHandle::Kind::external) {
            o["command"] = m.command;
            if (m.polarity) o["polarity"] = *m.polarity == Polarity::distance ? "distance" : "similarity";
            o["timeout_s"] = static_cast<double>(m.timeout.count()) / 1000.0;
        }
        ms.push_back(o);
    }
    auto& fam = j["families"] = nlohmann::ordered_json::array();
    for (Family f : cfg.families) fam.push_back(std::string(to_string(f)));
    const auto& g = cfg.grid;
    j["grid"] = {{"rotation_max", g.rotation_max},       {"rotation_step", g.rotation_step},
                 {"translation_max", g.translation_max}, {"translation_step", g.translation_step},
                 {"scale_min", g.scale_min},             {"scale_max", g.scale_max},
                 {"hues", g.hues},                       {"saturations", g.saturations},
                 {"saturation_max", g.saturation_max}};
    j["geometry"] = {{"pixels_per_degree", cfg.geometry.pixels_per_degree}};
    nlohmann::ordered_json t;
    t["source"] = cfg.threshold.kind == ThresholdSourceConfig::Kind::log ? "log" : "builtin";
    if (cfg.threshold.kind == ThresholdSourceConfig::Kind::log) t["log"] = cfg.threshold.log.string();
    t["bootstrap"] = cfg.threshold.bootstrap;
    j["threshold"] = t;
    if (cfg.human_constants) j["human_constants"] = cfg.human_constants->string();
    auto& re = j["reference_ellipses"] = nlohmann::ordered_json::array();
    for (const auto& e : cfg.reference_ellipses)
        re.push_back({{"name", e.name},
                      {"center", {e.ellipse.center.x, e.ellipse.center.y}},
                      {"semi_major", e.ellipse.semi_major},
                      {"semi_minor", e.ellipse.semi_minor},
                      {"angle", e.ellipse.angle}});
    j["sensitivity"] = {{"k", cfg.sensitivity.k},
                        {"rg_hue", cfg.sensitivity.rg_hue},
                        {"yb_hue", cfg.sensitivity.yb_hue},
                        {"human_ellipse", cfg.sensitivity.human_ellipse}};
    j["output_dir"] = cfg.output_dir.string();
    j["seed"] = cfg.seed;
    j["quantize"] = cfg.quantize;
    j["write_stimuli"] = cfg.write_stimuli;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

}  // namespace invt
