#include "invt/artifacts.hpp"

#include "invt/error.hpp"

#include <fstream>

namespace invt {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> read_optional(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

Json to_json(const ResponseCurve& c) {
    Json j;
    j["metric"] = c.metric;
    j["family"] = std::string(to_string(c.family));
    j["dataset"] = c.dataset;
    j["hue_index"] = c.hue_index;
    j["n_images"] = c.n_images;
    j["theta"] = c.thetas;
    j["raw"] = c.raw;
    j["energy"] = c.energy;
    j["equalized"] = c.equalized ? Json(*c.equalized) : Json(nullptr);
    return j;
}

ResponseCurve curve_from_json(const Json& j) {
    ResponseCurve c;
    c.metric = j.at("metric").get<std::string>();
    c.family = parse_family(j.at("family").get<std::string>());
    c.dataset = j.at("dataset").get<std::string>();
    c.hue_index = j.at("hue_index").get<int>();
    c.n_images = j.at("n_images").get<std::size_t>();
    c.thetas = j.at("theta").get<std::vector<double>>();
    c.raw = j.at("raw").get<std::vector<double>>();
    c.energy = j.at("energy").get<std::vector<double>>();
    if (!j.at("equalized").is_null()) c.equalized = j.at("equalized").get<std::vector<double>>();
    c.validate();
    return c;
}

Json to_json(const EqualizationFit& f) {
    Json j;
    j["a"] = f.a;
    j["b"] = f.b;
    j["residual"] = f.residual;
    j["n_pairs"] = f.n_pairs;
    return j;
}

EqualizationFit equalization_from_json(const Json& j) {
    return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("residual").get<double>(),
            j.at("n_pairs").get<std::size_t>()};
}

Json to_json(const ThresholdInterval& t) {
    Json j;
    j["metric"] = t.metric;
    j["family"] = std::string(to_string(t.family));
    j["dataset"] = t.dataset;
    j["center"] = optional_number(t.center);
    j["lo"] = optional_number(t.lo);
    j["hi"] = optional_number(t.hi);
    j["identity"] = t.identity;
    j["theta_max"] = t.theta_max;
    j["open_ended"] = t.open_ended();
    j["units"] = std::string(family_units(t.family));
    j["pixels_per_degree"] = t.pixels_per_degree;
    return j;
}

ThresholdInterval interval_from_json(const Json& j) {
    ThresholdInterval t;
    t.metric = j.at("metric").get<std::string>();
    t.family = parse_family(j.at("family").get<std::string>());
    t.dataset = j.at("dataset").get<std::string>();
    t.center = read_optional(j, "center");
    t.lo = read_optional(j, "lo");
    t.hi = read_optional(j, "hi");
    t.identity = j.at("identity").get<double>();
    t.theta_max = j.at("theta_max").get<double>();
    t.pixels_per_degree = j.at("pixels_per_degree").get<double>();
    return t;
}

Json to_json(const Ellipse& e) {
    Json j;
    j["center"] = {e.center.x, e.center.y};
    j["semi_major"] = e.semi_major;
    j["semi_minor"] = e.semi_minor;
    j["angle"] = e.angle;
    return j;
}

Ellipse ellipse_from_json(const Json& j) {
    Ellipse e;
    e.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
    e.semi_major = j.at("semi_major").get<double>();
    e.semi_minor = j.at("semi_minor").get<double>();
    e.angle = j.at("angle").get<double>();
    return e;
}

Json to_json(const PsychometricFit& f) {
    Json j;
    j["k"] = f.k;
    j["tau"] = f.tau;
    j["quartile_lo"] = f.quartile_lo;
    j["quartile_hi"] = f.quartile_hi;
    j["n_trials"] = f.n_trials;
    j["n_bootstrap"] = f.n_bootstrap;
    j["seed"] = f.seed;
    j["log_likelihood"] = f.log_likelihood;
    return j;
}

PsychometricFit psychometric_from_json(const Json& j) {
    PsychometricFit f;
    f.k = j.at("k").get<double>();
    f.tau = j.at("tau").get<double>();
    f.quartile_lo = j.at("quartile_lo").get<double>();
    f.quartile_hi = j.at("quartile_hi").get<double>();
    f.n_trials = j.at("n_trials").get<std::size_t>();
    f.n_bootstrap = j.at("n_bootstrap").get<std::size_t>();
    f.seed = j.at("seed").get<std::uint64_t>();
    f.log_likelihood = j.at("log_likelihood").get<double>();
    return f;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string() + " (run the earlier stages first)");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace invt
