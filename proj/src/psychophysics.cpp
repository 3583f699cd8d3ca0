#include "invt/psychophysics.hpp"

#include "invt/error.hpp"
#include "invt/optimize.hpp"
#include "invt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>

namespace invt {

namespace {

// Bounds on the standardised slope and threshold keep separable data finite.
constexpr double kLogSlopeMin = -7.0;
constexpr double kLogSlopeMax = 9.2;  // k_s <= ~1e4
constexpr double kTauMargin = 5.0;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// log(1 + e^z) without overflow.
double softplus(double z) noexcept { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double log_lik_standardised(std::span<const LevelCounts> counts, std::span<const double> xs, double k, double tau) {
    double ll = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i].n == 0) continue;
        const double z = k * (xs[i] - tau);
        // p = (1 + s)/2 with s = sigmoid(z); 1 - p = sigmoid(-z)/2.
        const double log_fail = -std::log(2.0) - softplus(z);
        const double log_pass = std::log1p(1.0 / (1.0 + std::exp(-z))) - std::log(2.0);
        ll += static_cast<double>(counts[i].correct) * log_pass +
              static_cast<double>(counts[i].n - counts[i].correct) * log_fail;
    }
    return ll;
}

struct Standardisation {
    double mean = 0.0;
    double scale = 1.0;
};

Standardisation standardise(std::span<const LevelCounts> counts) {
    double mean = 0.0;
    for (const auto& c : counts) mean += c.level;
    mean /= static_cast<double>(counts.size());
    double var = 0.0;
    for (const auto& c : counts) var += (c.level - mean) * (c.level - mean);
    const double scale = std::sqrt(var / static_cast<double>(counts.size()));
    return {mean, scale};
}

void check_identifiable(std::span<const LevelCounts> counts) {
    std::size_t distinct = 0, n = 0, correct = 0;
    bool above_chance = false;
    for (const auto& c : counts) {
        if (c.n == 0) continue;
        ++distinct;
        n += c.n;
        correct += c.correct;
        if (2 * c.correct > c.n) above_chance = true;
    }
    if (distinct < 2) throw InsufficientDataError("psychometric fit needs responses at 2 or more distinct levels");
    if (correct == n)
        throw FitError("non-identifiable fit: every response is correct, the threshold lies below the tested levels");
    if (!above_chance)
        throw FitError("non-identifiable fit: responses are at or below chance at every level");
}

struct MlResult {
    double log_k;  // standardised
    double tau;    // standardised
    double ll;
};

// Fisher scoring in (log k, tau) with step halving. Returns nothing when it
// leaves the box or stalls, so the caller can fall back to the simplex.
std::optional<MlResult> fisher_scoring(std::span<const LevelCounts> counts, std::span<const double> xs,
                                       std::array<double, 2> p, double tmin, double tmax) {
    double ll = log_lik_standardised(counts, xs, std::exp(p[0]), p[1]);
    for (int it = 0; it < 60; ++it) {
        const double k = std::exp(p[0]);
        double g0 = 0, g1 = 0, i00 = 0, i01 = 0, i11 = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i].n == 0) continue;
            const double z = k * (xs[i] - p[1]);
            const double sig = 1.0 / (1.0 + std::exp(-z));
            const double pr = std::clamp(0.5 * (1.0 + sig), 0.5, 1.0 - 1e-15);
            const double dp = 0.5 * sig * (1.0 - sig);
            const double n = static_cast<double>(counts[i].n), c = static_cast<double>(counts[i].correct);
            const double w = (c / pr - (n - c) / (1.0 - pr)) * dp;
            const double info = n * dp * dp / (pr * (1.0 - pr));
            const double a = z, b = -k;  // dz/dlog k, dz/dtau
            g0 += w * a;
            g1 += w * b;
            i00 += info * a * a;
            i01 += info * a * b;
            i11 += info * b * b;
        }
        const double det = i00 * i11 - i01 * i01;
        if (!(det > 0.0) || !std::isfinite(det)) return std::nullopt;
        const double d0 = (i11 * g0 - i01 * g1) / det, d1 = (i00 * g1 - i01 * g0) / det;
        double t = 1.0;
        std::array<double, 2> q{};
        double llq = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < 30; ++h, t *= 0.5) {
            q = {p[0] + t * d0, p[1] + t * d1};
            if (q[0] < kLogSlopeMin || q[0] > kLogSlopeMax || q[1] < tmin || q[1] > tmax) continue;
            llq = log_lik_standardised(counts, xs, std::exp(q[0]), q[1]);
            if (llq >= ll) break;
        }
        if (!(llq >= ll)) return std::nullopt;
        const bool done = std::abs(t * d0) < 1e-10 && std::abs(t * d1) < 1e-10;
        p = q;
        ll = llq;
        if (done) return MlResult{p[0], p[1], ll};
    }
    return std::nullopt;
}

MlResult maximise(std::span<const LevelCounts> counts, std::span<const double> xs, const MlResult* warm) {
    const double xmin = *std::min_element(xs.begin(), xs.end());
    const double xmax = *std::max_element(xs.begin(), xs.end());
    const double tmin = xmin - kTauMargin, tmax = xmax + kTauMargin;
    const auto nll = [&](const std::array<double, 2>& p) {
        const double lk = std::clamp(p[0], kLogSlopeMin, kLogSlopeMax);
        const double t = std::clamp(p[1], tmin, tmax);
        return -log_lik_standardised(counts, xs, std::exp(lk), t);
    };

    if (warm) {
        if (auto r = fisher_scoring(counts, xs, {warm->log_k, warm->tau}, tmin, tmax)) return *r;
    }

    std::array<double, 2> start{};
    double best = std::numeric_limits<double>::infinity();
    std::array<double, 2> step{0.5, 0.2};
    if (warm) {
        start = {warm->log_k, warm->tau};
        step = {0.2, 0.05};
    } else {
        constexpr int nk = 36, nt = 49;
        for (int i = 0; i < nk; ++i) {
            const double lk = std::log(0.05) + (std::log(5000.0) - std::log(0.05)) * i / (nk - 1);
            for (int j = 0; j < nt; ++j) {
                const double t = (xmin - 0.5) + (xmax - xmin + 1.0) * j / (nt - 1);
                const double v = nll({lk, t});
                if (v < best) {
                    best = v;
                    start = {lk, t};
                }
            }
        }
    }
    auto r = nelder_mead_2d(nll, start, step);
    // A restart from the optimum guards against early simplex collapse.
    r = nelder_mead_2d(nll, r.x, {0.05, 0.01});
    return {std::clamp(r.x[0], kLogSlopeMin, kLogSlopeMax), std::clamp(r.x[1], tmin, tmax), -r.value};
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + frac * (v[i + 1] - v[i]);
}

}  // namespace

double psychometric_probability(double level, double k, double tau) {
    if (!(k > 0.0)) throw ArgumentError("psychometric slope k must be positive");
    return 0.5 + 1.0 / (2.0 * (1.0 + std::exp(-k * (level - tau))));
}

std::vector<PlannedTrial> schedule_trials(std::span<const double> levels, std::size_t reps, std::size_t observers,
                                          std::uint64_t seed) {
    std::vector<double> sorted(levels.begin(), levels.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ArgumentError("schedule_trials: levels must be distinct");
    std::vector<PlannedTrial> plan;
    plan.reserve(levels.size() * reps * observers);
    for (std::size_t o = 0; o < observers; ++o) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(o)));
        std::vector<PlannedTrial> block;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const std::size_t first = reps / 2 + ((reps % 2 == 1) ? (rng() & 1u) : 0u);
            for (std::size_t r = 0; r < reps; ++r) block.push_back({o, l, levels[l], r < first});
        }
        std::shuffle(block.begin(), block.end(), rng);
        plan.insert(plan.end(), block.begin(), block.end());
    }
    return plan;
}

std::vector<LevelCounts> tally(std::span<const TrialRecord> trials) {
    std::map<double, LevelCounts> by_level;
    for (const auto& t : trials) {
        auto& c = by_level[t.level];
        c.level = t.level;
        ++c.n;
        if (t.correct) ++c.correct;
    }
    std::vector<LevelCounts> out;
    for (const auto& [level, c] : by_level) out.push_back(c);
    return out;
}

double psychometric_log_likelihood(std::span<const LevelCounts> counts, double k, double tau) {
    std::vector<double> xs;
    for (const auto& c : counts) xs.push_back(c.level);
    return log_lik_standardised(counts, xs, k, tau);
}

PsychometricFit fit_psychometric_ml(std::span<const LevelCounts> counts) {
    check_identifiable(counts);
    const Standardisation st = standardise(counts);
    std::vector<double> xs;
    for (const auto& c : counts) xs.push_back((c.level - st.mean) / st.scale);
    const MlResult r = maximise(counts, xs, nullptr);
    PsychometricFit fit;
    fit.k = std::exp(r.log_k) / st.scale;
    fit.tau = st.mean + st.scale * r.tau;
    fit.quartile_lo = fit.quartile_hi = fit.tau;
    for (const auto& c : counts) fit.n_trials += c.n;
    fit.log_likelihood = psychometric_log_likelihood(counts, fit.k, fit.tau);
    return fit;
}

PsychometricFit fit_psychometric(std::span<const TrialRecord> trials, const PsychometricOptions& options) {
    const std::vector<LevelCounts> counts = tally(trials);
    check_identifiable(counts);
    const Standardisation st = standardise(counts);
    std::vector<double> xs;
    for (const auto& c : counts) xs.push_back((c.level - st.mean) / st.scale);
    const MlResult full = maximise(counts, xs, nullptr);

    PsychometricFit fit;
    fit.k = std::exp(full.log_k) / st.scale;
    fit.tau = st.mean + st.scale * full.tau;
    fit.n_trials = trials.size();
    fit.seed = options.seed;
    fit.log_likelihood = psychometric_log_likelihood(counts, fit.k, fit.tau);

    // Level slot of each trial, for resampling.
    std::vector<std::size_t> slot(trials.size());
    std::vector<char> correct(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        slot[i] = static_cast<std::size_t>(
            std::lower_bound(counts.begin(), counts.end(), trials[i].level,
                             [](const LevelCounts& c, double l) { return c.level < l; }) -
            counts.begin());
        correct[i] = trials[i].correct ? 1 : 0;
    }

    std::vector<double> taus(options.bootstrap, std::numeric_limits<double>::quiet_NaN());
    parallel_for(options.bootstrap, options.threads, [&](std::size_t r) {
        std::mt19937_64 rng(splitmix64(options.seed + splitmix64(r + 1)));
        std::uniform_int_distribution<std::size_t> pick(0, trials.size() - 1);
        std::vector<LevelCounts> resampled = counts;
        for (auto& c : resampled) c.n = c.correct = 0;
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const std::size_t t = pick(rng);
            ++resampled[slot[t]].n;
            resampled[slot[t]].correct += static_cast<std::size_t>(correct[t]);
        }
        try {
            check_identifiable(resampled);
            const MlResult b = maximise(resampled, xs, &full);
            taus[r] = st.mean + st.scale * b.tau;
        } catch (const Error&) {
            // Resamples that cannot be fitted are left out of the quartiles.
        }
    });
    std::vector<double> ok;
    for (double t : taus)
        if (std::isfinite(t)) ok.push_back(t);
    fit.n_bootstrap = ok.size();
    if (ok.empty()) {
        fit.quartile_lo = fit.quartile_hi = fit.tau;
    } else {
        fit.quartile_lo = std::min(percentile(ok, 0.25), fit.tau);
        fit.quartile_hi = std::max(percentile(ok, 0.75), fit.tau);
    }
    return fit;
}

PsychometricFit human_threshold_physical(std::span<const TrialRecord> trials, const PsychometricOptions& options) {
    return fit_psychometric(trials, options);
}

}  // namespace invt
