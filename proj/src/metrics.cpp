#include "invt/metrics.hpp"

#include "invt/adapter.hpp"
#include "invt/error.hpp"
#include "invt/png_io.hpp"
#include "invt/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <unistd.h>

namespace invt {

namespace fs = std::filesystem;

namespace {

double checked(double d, std::size_t index) {
    if (!std::isfinite(d) || d < 0.0)
        throw MetricError("pair " + std::to_string(index) + ": metric returned invalid distance " +
                          std::to_string(d));
    return d;
}

}  // namespace

void MetricHandle::validate() const {
    if (name.empty()) throw ConfigError("metric without a name");
    if (kind == Kind::builtin) {
        if (name != "rmse" && name != "ssim")
            throw ConfigError("unknown builtin metric '" + name + "' (builtins are rmse and ssim)");
        if (!command.empty()) throw ConfigError("builtin metric '" + name + "' must not carry a command");
    } else if (command.empty()) {
        throw ConfigError("external metric '" + name + "' needs an adapter command");
    }
}

MetricHandle builtin_metric(const std::string& name) {
    MetricHandle h;
    h.name = name;
    h.kind = MetricHandle::Kind::builtin;
    h.polarity = name == "ssim" ? Polarity::similarity : Polarity::distance;
    h.validate();
    return h;
}

MetricHandle external_metric(const std::string& name, std::vector<std::string> command) {
    MetricHandle h;
    h.name = name;
    h.kind = MetricHandle::Kind::external;
    h.command = std::move(command);
    h.validate();
    return h;
}

std::vector<double> Metric::distances(std::span<const ImagePair> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        try {
            out.push_back(checked(distance(*pairs[i].reference, *pairs[i].distorted), i));
        } catch (const MetricError&) {
            throw;
        } catch (const Error& e) {
            throw MetricError("pair " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

std::vector<double> Metric::distances(std::span<const PathPair> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        try {
            const ImageBuffer a = load_image(pairs[i].reference);
            const ImageBuffer b = load_image(pairs[i].distorted);
            out.push_back(checked(distance(a, b), i));
        } catch (const MetricError&) {
            throw;
        } catch (const Error& e) {
            throw MetricError("pair " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

double RmseMetric::distance(const ImageBuffer& a, const ImageBuffer& b) { return rmse_energy(a, b); }

// Rounding can push s a hair above 1.
double SsimMetric::distance(const ImageBuffer& a, const ImageBuffer& b) { return std::max(0.0, 1.0 - ssim(a, b)); }

ExternalMetric::ExternalMetric(MetricHandle handle, fs::path scratch_dir)
    : handle_(std::move(handle)), scratch_dir_(std::move(scratch_dir)) {
    handle_.validate();
}

double ExternalMetric::distance(const ImageBuffer& a, const ImageBuffer& b) {
    const ImagePair pair{&a, &b};
    return distances(std::span<const ImagePair>(&pair, 1)).front();
}

std::vector<double> ExternalMetric::distances(std::span<const ImagePair> pairs) {
    const fs::path dir = scratch_dir_ / ("invt-" + handle_.name + "-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::vector<PathPair> paths;
    std::vector<fs::path> written;
    for (const auto& p : pairs) {
        const std::size_t id = scratch_counter_++;
        const fs::path ra = dir / ("r" + std::to_string(id) + ".png");
        const fs::path da = dir / ("d" + std::to_string(id) + ".png");
        save_image(*p.reference, ra);
        save_image(*p.distorted, da);
        written.push_back(ra);
        written.push_back(da);
        paths.push_back({ra.string(), da.string()});
    }
    std::vector<double> out;
    try {
        out = distances(std::span<const PathPair>(paths));
    } catch (...) {
        for (const auto& f : written) fs::remove(f);
        throw;
    }
    for (const auto& f : written) fs::remove(f);
    return out;
}

std::vector<double> ExternalMetric::distances(std::span<const PathPair> pairs) {
    std::vector<double> out;
    if (pairs.empty()) return out;
    out.reserve(pairs.size());
    AdapterSession session(handle_.command, handle_.timeout);
    if (handle_.polarity && (*handle_.polarity == Polarity::similarity) != session.similarity())
        throw MetricError("adapter for '" + handle_.name + "' declared a polarity that contradicts the configuration",
                          session.transcript());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double v = 0.0;
        try {
            v = session.query(pairs[i].reference, pairs[i].distorted);
        } catch (const MetricError& e) {
            throw MetricError("pair " + std::to_string(i) + ": " + e.what(), e.transcript());
        }
        if (session.similarity()) v = 1.0 - v;
        if (!std::isfinite(v) || v < 0.0)
            throw MetricError("pair " + std::to_string(i) + ": adapter value gives negative distance",
                              session.transcript());
        out.push_back(v);
    }
    session.close();
    return out;
}

std::unique_ptr<Metric> make_metric(const MetricHandle& handle, const fs::path& scratch_dir) {
    handle.validate();
    if (handle.kind == MetricHandle::Kind::external) return std::make_unique<ExternalMetric>(handle, scratch_dir);
    if (handle.name == "rmse") return std::make_unique<RmseMetric>();
    return std::make_unique<SsimMetric>();
}

double distance(Metric& metric, const ImageBuffer& a, const ImageBuffer& b) {
    return checked(metric.distance(a, b), 0);
}

std::vector<double> batch_distances(Metric& metric, std::span<const PathPair> pairs) {
    return metric.distances(pairs);
}

}  // namespace invt
