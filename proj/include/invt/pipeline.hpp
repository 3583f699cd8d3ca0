#pragma once

#include "invt/config.hpp"
#include "invt/error.hpp"
#include "invt/stimuli.hpp"

#include <string>
#include <vector>

namespace invt {

/// A stage failed; artifacts written by earlier stages are left in place.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct Dataset {
    std::string name;
    std::vector<SourceImage> images;
};

/// PNG files of the dataset directory in name order; when there are more than
/// `sample`, a seeded subset is kept (still in name order). Optional black
/// padding is applied. All images must share one size.
Dataset load_dataset(const DatasetConfig& config, std::uint64_t seed);

struct RatedPair {
    std::string reference;
    std::string distorted;
    double mos = 0.0;
};

/// CSV with columns reference,distorted,mos; relative paths resolve against the CSV's directory.
std::vector<RatedPair> load_rated_database(const std::filesystem::path& csv);

/// Stage names in pipeline order, as accepted by run_stage.
const std::vector<std::string>& stage_names();

void stage_stimuli(const RunConfig& cfg);
void stage_respond(const RunConfig& cfg);
void stage_equalize(const RunConfig& cfg);
void stage_psychofit(const RunConfig& cfg);
void stage_thresholds(const RunConfig& cfg);
void stage_ellipses(const RunConfig& cfg);
void stage_sensitivity(const RunConfig& cfg);
void stage_report(const RunConfig& cfg);

/// Runs one stage; failures other than ConfigError are rethrown as StageError.
void run_stage(const std::string& name, const RunConfig& cfg);

/// respond, equalize, psychofit, thresholds, ellipses, sensitivity, report
/// (preceded by stimuli when write_stimuli is set).
void run_pipeline(const RunConfig& cfg);

}  // namespace invt
