#pragma once

#include "invt/image.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace invt {

enum class Polarity { distance, similarity };

/// Configuration-level description of a metric.
struct MetricHandle {
    enum class Kind { builtin, external };

    std::string name;
    Kind kind = Kind::builtin;
    /// For external metrics the adapter's READY line decides; a declared value
    /// here must agree with it.
    std::optional<Polarity> polarity;
    std::vector<std::string> command;
    std::chrono::milliseconds timeout{120000};

    /// Throws ConfigError for unknown builtins or external handles without a command.
    void validate() const;
};

MetricHandle builtin_metric(const std::string& name);
MetricHandle external_metric(const std::string& name, std::vector<std::string> command);

struct ImagePair {
    const ImageBuffer* reference;
    const ImageBuffer* distorted;
};

struct PathPair {
    std::string reference;
    std::string distorted;
};

/// A distance between two images; similarity metrics are reported as 1 - s.
class Metric {
public:
    virtual ~Metric() = default;

    virtual const std::string& name() const noexcept = 0;
    virtual double distance(const ImageBuffer& a, const ImageBuffer& b) = 0;

    /// Order-preserving; a failing pair aborts with a MetricError naming its index.
    virtual std::vector<double> distances(std::span<const ImagePair> pairs);
    virtual std::vector<double> distances(std::span<const PathPair> pairs);

    /// True when distance() may be called from several threads at once.
    virtual bool concurrent() const noexcept { return false; }
};

class RmseMetric final : public Metric {
public:
    const std::string& name() const noexcept override { return name_; }
    double distance(const ImageBuffer& a, const ImageBuffer& b) override;
    bool concurrent() const noexcept override { return true; }

private:
    std::string name_ = "rmse";
};

class SsimMetric final : public Metric {
public:
    const std::string& name() const noexcept override { return name_; }
    /// 1 - SSIM, in [0, 2].
    double distance(const ImageBuffer& a, const ImageBuffer& b) override;
    bool concurrent() const noexcept override { return true; }

private:
    std::string name_ = "ssim";
};

/// Metric computed by a child process speaking the adapter protocol. In-memory
/// pairs are written to `scratch_dir` as 8-bit PNGs before being sent.
class ExternalMetric final : public Metric {
public:
    ExternalMetric(MetricHandle handle, std::filesystem::path scratch_dir);

    const std::string& name() const noexcept override { return handle_.name; }
    double distance(const ImageBuffer& a, const ImageBuffer& b) override;
    std::vector<double> distances(std::span<const ImagePair> pairs) override;
    std::vector<double> distances(std::span<const PathPair> pairs) override;

private:
    MetricHandle handle_;
    std::filesystem::path scratch_dir_;
    std::size_t scratch_counter_ = 0;
};

std::unique_ptr<Metric> make_metric(const MetricHandle& handle,
                                    const std::filesystem::path& scratch_dir = std::filesystem::temp_directory_path());

/// d_M(a, b).
double distance(Metric& metric, const ImageBuffer& a, const ImageBuffer& b);

/// Distances for (reference, distorted) file pairs; external metrics see one session.
std::vector<double> batch_distances(Metric& metric, std::span<const PathPair> pairs);

}  // namespace invt
