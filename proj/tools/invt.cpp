#include "invt/artifacts.hpp"
#include "invt/error.hpp"
#include "invt/experiment.hpp"
#include "invt/http_service.hpp"
#include "invt/pipeline.hpp"
#include "invt/png_io.hpp"
#include "invt/toy_data.hpp"
#include "invt/trial_log.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <iostream>

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kStageError = 3;

invt::ExperimentService* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

int psychofit_log(const fs::path& log, const std::string& axis, std::size_t bootstrap, std::uint64_t seed,
                  const std::string& out) {
    std::vector<invt::TrialRecord> trials;
    for (auto& t : invt::read_trial_log(log))
        if (t.axis == axis) trials.push_back(std::move(t));
    if (trials.empty()) throw invt::InsufficientDataError("no trials on axis '" + axis + "' in " + log.string());
    invt::PsychometricOptions opt;
    opt.bootstrap = bootstrap;
    opt.seed = seed;
    invt::Json j = invt::to_json(invt::fit_psychometric(trials, opt));
    j["axis"] = axis;
    if (out.empty()) std::cout << j.dump(2) << '\n';
    else invt::write_json(out, j);
    return kOk;
}

int serve(const fs::path& manifest, const fs::path& data_dir, invt::ServiceOptions options) {
    invt::ExperimentStore store(data_dir, invt::read_stimulus_manifest(manifest));
    invt::ExperimentService service(store, options);
    const int port = service.bind();
    std::cout << "serving on http://" << options.host << ":" << port << std::endl;
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    service.serve();
    g_service = nullptr;
    return kOk;
}

int experiment_levels(const fs::path& image, const std::string& family, const std::vector<double>& levels,
                      double ppd, const fs::path& out) {
    const invt::ImageBuffer src = invt::load_image(image);
    const invt::Family f = invt::parse_family(family);
    if (f == invt::Family::illuminant) throw invt::ConfigError("use a hue direction grid for illuminant sessions");
    invt::ViewingGeometry geom{ppd};
    std::vector<invt::StimulusLevel> rows;
    invt::save_image(src, out / "reference.png");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const invt::TransformSpec spec{f, levels[i]};
        const fs::path name = "level" + std::to_string(i) + ".png";
        invt::save_image(invt::apply_transform(src, spec, geom), out / name);
        rows.push_back({levels[i], "reference.png", name.string()});
    }
    invt::write_stimulus_manifest(rows, out / "stimuli.csv");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"invt: invisibility thresholds of image-quality metrics under affine transforms"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<CLI::App*> stage_cmds;
    const std::vector<std::pair<std::string, std::string>> stages{
        {"stimuli", "render distorted stimuli and manifest.csv"},
        {"respond", "compute response curves"},
        {"equalize", "fit equalization functions on the rated database"},
        {"thresholds", "invert curves at the internal threshold"},
        {"ellipses", "fit metric chromatic ellipses"},
        {"sensitivity", "sensitivities and orderings"},
        {"report", "render tables and plot data"},
        {"run", "run every stage in order"}};
    for (const auto& [name, help] : stages) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("-c,--config", config_path, "run configuration (JSON)")->required();
        stage_cmds.push_back(cmd);
    }

    auto* psy = app.add_subcommand("psychofit", "fit the psychometric function to a trial log");
    std::string log_path, axis = "D", fit_out;
    std::size_t bootstrap = 1000;
    std::uint64_t seed = 20240601;
    psy->add_option("-c,--config", config_path, "run configuration; fits the configured log into the output dir");
    psy->add_option("--log", log_path, "trial log (JSON lines)");
    psy->add_option("--axis", axis, "level axis to fit")->capture_default_str();
    psy->add_option("--bootstrap", bootstrap, "bootstrap resamples")->capture_default_str();
    psy->add_option("--seed", seed, "bootstrap seed")->capture_default_str();
    psy->add_option("-o,--out", fit_out, "write the fit here instead of stdout");

    auto* srv = app.add_subcommand("experiment-serve", "serve 2AFC sessions over HTTP");
    std::string manifest, data_dir = "experiment-data", static_dir, service_config;
    invt::ServiceOptions sopt;
    srv->add_option("--stimuli", manifest, "stimulus manifest CSV (level,reference,distorted)");
    srv->add_option("--data", data_dir, "session storage directory")->capture_default_str();
    srv->add_option("--host", sopt.host, "bind address")->capture_default_str();
    srv->add_option("--port", sopt.port, "port (0 picks a free one)")->capture_default_str();
    srv->add_option("--static", static_dir, "UI bundle directory served at /");
    srv->add_option("--reps", sopt.default_reps, "repetitions per level")->capture_default_str();
    srv->add_option("--seed", sopt.default_seed, "default session seed")->capture_default_str();
    srv->add_option("--service-config", service_config,
                    "JSON with any of host, port, stimuli, data, static, reps, seed (flags override)");

    auto* lv = app.add_subcommand("experiment-levels", "render a physical-axis stimulus set for a session");
    std::string image, family, levels_out;
    std::vector<double> levels;
    double ppd = 32.0;
    lv->add_option("--image", image, "reference PNG")->required();
    lv->add_option("--family", family, "translation, rotation or scale")->required();
    lv->add_option("--levels", levels, "intensities")->required()->delimiter(',');
    lv->add_option("--ppd", ppd, "pixels per degree")->capture_default_str();
    lv->add_option("-o,--out", levels_out, "output directory")->required();

    auto* toy = app.add_subcommand("toy-data", "write a procedural dataset, rated database and config");
    std::string toy_out;
    invt::ToyDataOptions topt;
    toy->add_option("-o,--out", toy_out, "output directory")->required();
    toy->add_option("--images", topt.images, "image count")->capture_default_str();
    toy->add_option("--size", topt.size, "image side in pixels")->capture_default_str();
    toy->add_option("--seed", topt.seed, "generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        for (auto* cmd : stage_cmds) {
            if (!cmd->parsed()) continue;
            const invt::RunConfig cfg = invt::load_config(config_path);
            if (cmd->get_name() == "run") invt::run_pipeline(cfg);
            else invt::run_stage(cmd->get_name(), cfg);
            std::cout << cmd->get_name() << ": ok (" << cfg.output_dir.string() << ")\n";
            return kOk;
        }
        if (psy->parsed()) {
            if (!log_path.empty()) return psychofit_log(log_path, axis, bootstrap, seed, fit_out);
            if (config_path.empty()) throw invt::ConfigError("psychofit needs --log or --config");
            const invt::RunConfig cfg = invt::load_config(config_path);
            invt::run_stage("psychofit", cfg);
            return kOk;
        }
        if (srv->parsed()) {
            if (!service_config.empty()) {
                const invt::Json j = invt::read_json(service_config);
                const fs::path base = fs::absolute(service_config).parent_path();
                const auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
                if (srv->count("--host") == 0 && j.contains("host")) sopt.host = j.at("host").get<std::string>();
                if (srv->count("--port") == 0 && j.contains("port")) sopt.port = j.at("port").get<int>();
                if (manifest.empty() && j.contains("stimuli")) manifest = rel(j.at("stimuli").get<std::string>()).string();
                if (srv->count("--data") == 0 && j.contains("data")) data_dir = rel(j.at("data").get<std::string>()).string();
                if (static_dir.empty() && j.contains("static")) static_dir = rel(j.at("static").get<std::string>()).string();
                if (srv->count("--reps") == 0 && j.contains("reps")) sopt.default_reps = j.at("reps").get<std::size_t>();
                if (srv->count("--seed") == 0 && j.contains("seed")) sopt.default_seed = j.at("seed").get<std::uint64_t>();
            }
            if (manifest.empty()) throw invt::ConfigError("experiment-serve needs --stimuli");
            if (!static_dir.empty()) sopt.static_dir = static_dir;
            return serve(manifest, data_dir, sopt);
        }
        if (lv->parsed()) return experiment_levels(image, family, levels, ppd, levels_out);
        if (toy->parsed()) {
            invt::write_toy_data(toy_out, topt);
            std::cout << "wrote " << toy_out << "/config.json\n";
            return kOk;
        }
    } catch (const invt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const invt::StageError& e) {
        std::cerr << e.what() << '\n';
        return kStageError;
    } catch (const invt::MetricError& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (!e.transcript().empty()) std::cerr << "adapter transcript:\n" << e.transcript() << '\n';
        return kStageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStageError;
    }
    return kOk;
}
