#pragma once

#include "invt/chromatic.hpp"
#include "invt/metrics.hpp"
#include "invt/transforms.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace invt {

struct DatasetConfig {
    std::string name;
    std::filesystem::path path;  // directory of PNG files
    std::size_t sample = 250;
    std::optional<std::array<std::size_t, 2>> pad_to;  // black padding, width x height
};

struct RatedDatabaseConfig {
    std::filesystem::path csv;  // columns reference,distorted,mos; paths relative to the CSV
    bool higher_is_better = true;
};

struct ThresholdSourceConfig {
    enum class Kind { builtin, log };
    Kind kind = Kind::builtin;
    std::filesystem::path log;  // trial log with axis "D" when kind == log
    std::size_t bootstrap = 1000;
};

struct NamedEllipse {
    std::string name;
    Ellipse ellipse;
};

struct SensitivityConfig {
    std::size_t k = 5;
    int rg_hue = 8;
    int yb_hue = 3;
    /// Reference ellipse whose radii serve as the human RG/YB thresholds.
    std::string human_ellipse;
};

struct RunConfig {
    std::filesystem::path source;  // config file, empty when built in code
    std::vector<DatasetConfig> datasets;
    std::optional<RatedDatabaseConfig> rated_database;
    std::vector<MetricHandle> metrics;
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    GridConfig grid;
    ViewingGeometry geometry;
    ThresholdSourceConfig threshold;
    std::optional<std::filesystem::path> human_constants;
    std::vector<NamedEllipse> reference_ellipses;
    SensitivityConfig sensitivity;
    std::filesystem::path output_dir = "invt-out";
    std::uint64_t seed = 1;
    bool quantize = true;
    bool write_stimuli = false;
    unsigned threads = 0;

    /// Throws ConfigError on invalid values or missing referenced paths.
    void validate() const;
};

/// Parses a JSON configuration; relative paths resolve against the file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Reference ellipses file: {"ellipses": [{"name", "center": [x, y], "semi_major", "semi_minor", "angle"}]}.
std::vector<NamedEllipse> load_reference_ellipses(const std::filesystem::path& path);

/// The fully resolved configuration as JSON, recorded next to the outputs.
std::string config_to_json(const RunConfig& cfg);

}  // namespace invt
