#pragma once

#include "invt/image.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

inline std::filesystem::path tmp_dir(const std::string& name) {
    const auto p = std::filesystem::path(INVT_TEST_TMP) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline invt::ImageBuffer random_image(std::size_t w, std::size_t h, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    invt::ImageBuffer img(w, h, c);
    for (auto& v : img.samples()) v = u(rng);
    return img;
}

}  // namespace testutil

#include "invt/psychophysics.hpp"

namespace testutil {

// Simulated 2AFC observer answering every planned trial at levels `levels`.
inline std::vector<invt::TrialRecord> simulate_observer(const std::vector<double>& levels, std::size_t reps,
                                                        double k, double tau, std::uint64_t seed,
                                                        std::size_t observers = 1) {
    const auto plan = invt::schedule_trials(levels, reps, observers, seed);
    std::mt19937_64 rng(seed * 7919 + 13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<invt::TrialRecord> out;
    out.reserve(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        invt::TrialRecord r;
        r.session = "sim";
        r.trial_index = i;
        r.level = plan[i].level;
        r.distorted_first = plan[i].distorted_first;
        r.correct = u(rng) < invt::psychometric_probability(plan[i].level, k, tau);
        out.push_back(r);
    }
    return out;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace testutil
