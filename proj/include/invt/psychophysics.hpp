#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace invt {

/// Two-alternative forced-choice detection probability:
/// p = 1/2 + 1 / (2 (1 + exp(-k (level - tau)))).
double psychometric_probability(double level, double k, double tau);

/// One scheduled presentation of a constant-stimulus experiment.
struct PlannedTrial {
    std::size_t observer = 0;
    std::size_t level_index = 0;
    double level = 0.0;
    /// True when the distorted image is shown in the first (left) interval.
    bool distorted_first = false;
};

/// Every level `reps` times per observer in a seeded random order. Within each
/// (observer, level) the distorted image goes first in floor(reps/2) or
/// ceil(reps/2) presentations, chosen at random.
std::vector<PlannedTrial> schedule_trials(std::span<const double> levels, std::size_t reps,
                                          std::size_t observers, std::uint64_t seed);

struct TrialRecord {
    std::string session;
    std::size_t trial_index = 0;
    double level = 0.0;
    std::string axis = "D";  // "D" for the internal scale, or a physical family name
    std::string reference;
    std::string distorted;
    bool distorted_first = false;
    bool correct = false;
    std::int64_t timestamp_ms = 0;
};

struct PsychometricFit {
    double k = 0.0;
    double tau = 0.0;
    double quartile_lo = 0.0;
    double quartile_hi = 0.0;
    std::size_t n_trials = 0;
    std::size_t n_bootstrap = 0;  // resamples that produced a fit
    std::uint64_t seed = 0;
    double log_likelihood = 0.0;
};

/// Per-level tallies, the sufficient statistics of the Bernoulli model.
struct LevelCounts {
    double level = 0.0;
    std::size_t n = 0;
    std::size_t correct = 0;
};

std::vector<LevelCounts> tally(std::span<const TrialRecord> trials);

/// Log-likelihood of (k, tau) under the Bernoulli model.
double psychometric_log_likelihood(std::span<const LevelCounts> counts, double k, double tau);

struct PsychometricOptions {
    std::size_t bootstrap = 1000;
    std::uint64_t seed = 20240601;
    unsigned threads = 0;
};

/// Maximum-likelihood (k, tau) without bootstrap. Throws FitError when the data
/// cannot identify the curve (everything correct, or nothing above chance).
PsychometricFit fit_psychometric_ml(std::span<const LevelCounts> counts);

/// ML fit plus bootstrap 25th/75th percentiles of tau over resampled trials.
/// The reported quartile interval is widened to contain tau if needed.
PsychometricFit fit_psychometric(std::span<const TrialRecord> trials, const PsychometricOptions& options = {});

/// Same procedure on a physical intensity axis (translation, rotation, ...).
PsychometricFit human_threshold_physical(std::span<const TrialRecord> trials,
                                         const PsychometricOptions& options = {});

}  // namespace invt
