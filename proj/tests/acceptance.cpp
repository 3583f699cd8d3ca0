// Acceptance checks: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any gating criterion fails.
#include "invt/artifacts.hpp"
#include "invt/chromatic.hpp"
#include "invt/error.hpp"
#include "invt/pipeline.hpp"
#include "invt/psychophysics.hpp"
#include "invt/report.hpp"
#include "invt/ssim.hpp"
#include "invt/toy_data.hpp"
#include "invt/transduction.hpp"
#include "invt/transforms.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace invt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances, all fixed here.
constexpr double kPsyTauTol = 0.03;
constexpr double kPsyHalfwidthMax = 0.06;
constexpr double kPsyPassFraction = 0.95;
constexpr int kPsySeeds = 50;
constexpr double kPsySeconds = 10.0;

constexpr double kAnalyticReparamTol = 1e-12;
constexpr int kAnalyticGrid = 10000;

constexpr int kEqDraws = 50;
constexpr double kEqExactTol = 1e-6;
constexpr double kEqNoise = 0.01;
constexpr double kEqNoisyTol = 0.05;
constexpr double kEqPassFraction = 0.95;
constexpr double kEqSeconds = 5.0;

constexpr int kInversionDraws = 100;

constexpr int kEllipseDraws = 100;
constexpr double kEllipseTol = 1e-8;
constexpr double kEllipseRmseTol = 1e-12;

constexpr int kSsimPairs = 24;
constexpr double kSsimTol = 1e-4;

constexpr double kChromaTol = 1e-4;

constexpr double kGainFactor = 100.0;
constexpr double kGainRelTol = 1e-9;

constexpr double kToySeconds = 120.0;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail, bool gating = true) {
    std::printf("%s %s: %s%s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(),
                gating ? "" : " (non-gating)");
    std::fflush(stdout);
    if (!pass && gating) ++failures;
}

void skip(const std::string& name, const std::string& why) {
    std::printf("SKIP %s: %s\n", name.c_str(), why.c_str());
    std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Runs `fn`, turning an escaped exception into a failure line.
void guarded(const std::string& name, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

void psychometric_recovery() {
    const auto levels = testutil::linspace(0.05, 1.0, 20);
    const auto t0 = Clock::now();
    int ok = 0;
    double worst_tau = 0.0, worst_half = 0.0;
    for (int seed = 1; seed <= kPsySeeds; ++seed) {
        const auto trials = testutil::simulate_observer(levels, 75, 40.0, 0.44, static_cast<std::uint64_t>(seed));
        const auto fit = fit_psychometric(trials, {1000, static_cast<std::uint64_t>(seed), 0});
        const double dtau = std::abs(fit.tau - 0.44);
        const double half = 0.5 * (fit.quartile_hi - fit.quartile_lo);
        worst_tau = std::max(worst_tau, dtau);
        worst_half = std::max(worst_half, half);
        if (dtau <= kPsyTauTol && half <= kPsyHalfwidthMax) ++ok;
    }
    const double secs = seconds_since(t0);
    const bool pass = ok >= kPsyPassFraction * kPsySeeds && secs < kPsySeconds;
    report("psychometric-recovery", pass,
           fmt("%d/%d seeds within |tau-0.44|<=%.2f and halfwidth<=%.2f (worst %.4f, %.4f); %.2f s (limit %.0f s)", ok,
               kPsySeeds, kPsyTauTol, kPsyHalfwidthMax, worst_tau, worst_half, secs, kPsySeconds));
}

void psychometric_analytic() {
    bool exact = true;
    for (double k : {0.5, 7.0, 40.0, 900.0})
        for (double tau : {-1.0, 0.0, 0.44, 3.5}) exact = exact && psychometric_probability(tau, k, tau) == 0.75;
    bool monotone = true;
    double prev = -1.0;
    for (int i = 0; i <= kAnalyticGrid; ++i) {
        const double p = psychometric_probability(-0.5 + 2.0 * i / kAnalyticGrid, 40.0, 0.44);
        monotone = monotone && p >= prev && p >= 0.5 && p <= 1.0;
        prev = p;
    }
    double worst = 0.0;
    for (double s : {0.1, 2.0, 17.0})
        for (double c : {-2.0, 0.3, 5.0})
            for (int i = 0; i <= 100; ++i) {
                const double x = -0.5 + 2.0 * i / 100.0;
                worst = std::max(worst, std::abs(psychometric_probability(x, 40.0, 0.44) -
                                                 psychometric_probability(s * x + c, 40.0 / s, s * 0.44 + c)));
            }
    report("psychometric-analytic", exact && monotone && worst <= kAnalyticReparamTol,
           fmt("p(tau)=0.75 exact: %s; monotone on %d points: %s; reparameterization max diff %.3g (tol %.0e)",
               exact ? "yes" : "no", kAnalyticGrid, monotone ? "yes" : "no", worst, kAnalyticReparamTol));
}

void equalization_recovery() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(0.5, 3.0), ub(0.3, 2.0), uu(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, kEqNoise);
    const auto t0 = Clock::now();
    int exact_ok = 0, noisy_ok = 0;
    double worst_exact = 0.0;
    for (int draw = 0; draw < kEqDraws; ++draw) {
        const double a = ua(rng), b = ub(rng);
        // Distances whose mapped scores spread over (0.02, 1).
        const double dmax = std::pow(1.0 / a, 1.0 / b);
        std::vector<double> d, D, Dn;
        for (int i = 0; i < 100; ++i) {
            const double x = dmax * std::pow(0.02 + 0.98 * uu(rng), 1.0 / b);
            d.push_back(x);
            D.push_back(std::min(1.0, a * std::pow(x, b)));
            Dn.push_back(std::clamp(D.back() + noise(rng), 0.0, 1.0));
        }
        const auto f = fit_equalization(d, D);
        const double e = std::max(std::abs(f.a - a) / a, std::abs(f.b - b) / b);
        worst_exact = std::max(worst_exact, e);
        if (e <= kEqExactTol) ++exact_ok;
        const auto g = fit_equalization(d, Dn);
        if (std::abs(g.a - a) / a <= kEqNoisyTol && std::abs(g.b - b) / b <= kEqNoisyTol) ++noisy_ok;
    }
    const double secs = seconds_since(t0);
    const bool pass = exact_ok == kEqDraws && noisy_ok >= kEqPassFraction * kEqDraws && secs < kEqSeconds;
    report("equalization-recovery", pass,
           fmt("noise-free %d/%d within %.0e (worst %.2e); sigma=%.2f noise %d/%d within %.0f%%; %.2f s", exact_ok,
               kEqDraws, kEqExactTol, worst_exact, kEqNoise, noisy_ok, kEqDraws, 100 * kEqNoisyTol, secs));
}

void inversion_round_trip() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    int ok = 0;
    double worst_steps = 0.0;
    for (int draw = 0; draw < kInversionDraws; ++draw) {
        // g(theta) = sum_i w_i (theta/theta_max)^p_i: strictly increasing, g(0) = 0.
        const double theta_max = 0.5 + 10.0 * uu(rng);
        const int n = 20 + static_cast<int>(uu(rng) * 180);
        std::vector<double> w(3), p(3);
        for (int i = 0; i < 3; ++i) {
            w[static_cast<std::size_t>(i)] = 0.05 + uu(rng);
            p[static_cast<std::size_t>(i)] = 0.3 + 3.0 * uu(rng);
        }
        const auto g = [&](double t) {
            double s = 0.0;
            for (std::size_t i = 0; i < 3; ++i) s += w[i] * std::pow(t / theta_max, p[i]);
            return s;
        };
        ResponseCurve c;
        c.metric = "synthetic";
        c.family = Family::translation;
        for (int i = 0; i < n; ++i) {
            const double t = theta_max * i / (n - 1);
            c.thetas.push_back(t);
            c.raw.push_back(g(t));
        }
        const double step = theta_max / (n - 1);
        const double theta_star = theta_max * (0.02 + 0.96 * uu(rng));
        const double level = g(theta_star);
        const auto iv = invert_threshold(transduce(c, {1.0, 1.0}), level, level, level);
        if (!iv.center) continue;
        const double steps = std::abs(*iv.center - theta_star) / step;
        worst_steps = std::max(worst_steps, steps);
        if (steps <= 1.0) ++ok;
    }
    report("inversion-round-trip", ok == kInversionDraws,
           fmt("%d/%d within one grid step (worst %.3f steps)", ok, kInversionDraws, worst_steps));
}

void ellipse_recovery() {
    constexpr double pi = std::numbers::pi;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ua(0.005, 0.05), ur(0.2, 0.9), uang(0.0, pi), uu(0.0, 1.0);
    int ok = 0;
    double worst = 0.0;
    for (int draw = 0; draw < kEllipseDraws; ++draw) {
        const double a = ua(rng);
        const Ellipse truth{kWhitePoint, a, a * ur(rng), uang(rng)};
        // Four polar directions in distinct half-turns, never antipodal.
        std::vector<std::array<double, 2>> dirs;
        std::vector<double> radii;
        const double phi0 = 2 * pi * uu(rng);
        for (double off : {0.0, 0.9, 2.1, 4.0}) {
            const double phi = phi0 + off + 0.2 * uu(rng);
            dirs.push_back({std::cos(phi), std::sin(phi)});
            radii.push_back(truth.radius(phi));
        }
        const auto fit = fit_ellipse_fixed_center(radial_threshold_points(kWhitePoint, dirs, radii), kWhitePoint);
        double dang = std::fmod(std::abs(fit.ellipse.angle - truth.angle), pi);
        dang = std::min(dang, pi - dang);
        const double e = std::max({std::abs(fit.ellipse.semi_major - truth.semi_major) / truth.semi_major,
                                   std::abs(fit.ellipse.semi_minor - truth.semi_minor) / truth.semi_minor, dang});
        worst = std::max(worst, e);
        if (e <= kEllipseTol) ++ok;
    }

    // ellipse_rmse identities.
    const Ellipse e1{kWhitePoint, 0.04, 0.015, 0.3}, e2{kWhitePoint, 0.025, 0.02, 2.0};
    double id_err = std::abs(ellipse_rmse(e1, e1));
    for (double r : {0.01, 0.03})
        for (double d : {0.002, 0.01})
            id_err = std::max(id_err, std::abs(ellipse_rmse(Ellipse{kWhitePoint, r, r, 0.0},
                                                            Ellipse{kWhitePoint, r + d, r + d, 0.0}) -
                                               d));
    for (double s : {0.5, 3.0})
        id_err = std::max(id_err, std::abs(ellipse_rmse(scale_ellipse(e1, s), scale_ellipse(e2, s)) -
                                           s * ellipse_rmse(e1, e2)));
    report("ellipse-recovery", ok == kEllipseDraws && id_err <= kEllipseRmseTol,
           fmt("%d/%d four-point fits within %.0e (worst %.2e); rmse identities max error %.2e (tol %.0e)", ok,
               kEllipseDraws, kEllipseTol, worst, id_err, kEllipseRmseTol));
}

void ssim_oracle() {
    const ViewingGeometry geom{32.0};
    const std::vector<TransformSpec> specs{{Family::rotation, 3.0},
                                           {Family::scale, 0.85},
                                           {Family::translation, 0.12, {1.0, 0.0}},
                                           {Family::illuminant, 0.05, {0.0, 1.0}, 5}};
    int n = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; n < kSsimPairs; ++seed) {
        const ImageBuffer ref = procedural_image(40, 36, seed);
        for (const auto& s : specs) {
            if (n >= kSsimPairs) break;
            const ImageBuffer dist = quantize8(apply_transform(ref, s, geom));
            worst = std::max(worst, std::abs(ssim(ref, dist) - oracle::ssim(ref, dist)));
            ++n;
        }
    }
    report("ssim-oracle", worst <= kSsimTol, fmt("%d pairs, max |diff| %.3g (tol %.0e)", n, worst, kSsimTol));
}

void transform_identities() {
    const ViewingGeometry geom{100.0};
    const ImageBuffer img = procedural_image(50, 38, 5);
    bool identity = true;
    for (Family f : kAllFamilies) identity = identity && apply_transform(img, {f, identity_theta(f)}, geom) == img;

    bool crop_mosaic = true;
    for (std::size_t m : {1u, 7u, 38u}) crop_mosaic = crop_mosaic && crop_center(mosaic_pad(img, m), 50, 38) == img;

    // Integral shifts against direct reflect-101 indexing.
    bool shift = true;
    const auto reflect = [](long i, long n) {
        const long period = 2 * (n - 1);
        const long m = ((i % period) + period) % period;
        return static_cast<std::size_t>(m < n ? m : period - m);
    };
    for (const auto& dir : translation_directions()) {
        const ImageBuffer out = apply_transform(img, {Family::translation, 0.3, dir}, geom);
        const long dx = std::lround(30 * dir[0]), dy = std::lround(30 * dir[1]);
        for (long y = 0; y < 38; ++y)
            for (long x = 0; x < 50; ++x)
                for (std::size_t c = 0; c < 3; ++c)
                    shift = shift && out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) ==
                                         img.at(reflect(x - dx, 50), reflect(y - dy, 38), c);
    }

    // Chromaticity of mid-gray after each grid illuminant, via hand-derived luminance weights
    // and the primaries' xy. Targets that drive a channel out of [0, 1] clip and are not checked.
    const double xs[3] = {0.64, 0.30, 0.15}, ys[3] = {0.33, 0.60, 0.06};
    const auto wts = oracle::luminance_weights();
    ImageBuffer gray(2, 2, 3, 0.5f);
    gray.set_linear(true);
    double worst = 0.0;
    int n_checked = 0, n_clipped = 0;
    for (const auto& s : theta_grid(Family::illuminant, GridConfig{}, 2, 2)) {
        const ImageBuffer out = apply_transform(gray, s, geom);
        bool clipped = false;
        for (std::size_t c = 0; c < 3; ++c) clipped = clipped || out.at(0, 0, c) >= 1.0f || out.at(0, 0, c) <= 0.0f;
        if (clipped) {
            ++n_clipped;
            continue;
        }
        ++n_checked;
        double X = 0, Y = 0, Z = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double v = out.at(0, 0, c) * wts[c];
            X += v * xs[c] / ys[c];
            Y += v;
            Z += v * (1 - xs[c] - ys[c]) / ys[c];
        }
        const Chromaticity target = s.illuminant_target();
        worst = std::max({worst, std::abs(X / (X + Y + Z) - target.x), std::abs(Y / (X + Y + Z) - target.y)});
    }
    report("transform-identities", identity && crop_mosaic && shift && n_checked > 0 && worst <= kChromaTol,
           fmt("identity bit-exact: %s; crop(mosaic) identity: %s; integral shift oracle: %s; "
               "mid-gray chromaticity max error %.2e over %d unclipped targets (tol %.0e, %d clipped targets excluded)",
               identity ? "yes" : "no", crop_mosaic ? "yes" : "no", shift ? "yes" : "no", worst, n_checked, kChromaTol,
               n_clipped));
}

// Threshold centres and orderings of a finished run.
struct RunSummary {
    std::vector<std::optional<double>> centers;
    std::vector<std::string> orderings;
};

RunSummary summarize(const fs::path& out) {
    const ReportTables t = read_report_csv(out / "report");
    RunSummary s;
    for (const auto& r : t.thresholds) s.centers.push_back(r.center);
    for (const auto& o : t.orderings) s.orderings.push_back(o.subject + ":" + o.ordering);
    return s;
}

void metric_gain_invariance(const fs::path& work) {
    const fs::path data = work / "gain";
    fs::remove_all(data);
    write_toy_data(data, {4, 48, 11});
    RunConfig base = load_config(data / "config.json");
    base.threads = 1;
    RunConfig unit = base, gained = base;
    unit.metrics = {external_metric("stub", {INVT_STUB_ADAPTER, "rmse"})};
    unit.output_dir = data / "out1";
    gained.metrics = {external_metric("stub", {INVT_STUB_ADAPTER, "rmse", std::to_string(kGainFactor)})};
    gained.output_dir = data / "out100";
    run_pipeline(unit);
    run_pipeline(gained);
    const RunSummary a = summarize(unit.output_dir), b = summarize(gained.output_dir);
    bool same_open = a.centers.size() == b.centers.size();
    double worst = 0.0;
    for (std::size_t i = 0; same_open && i < a.centers.size(); ++i) {
        if (a.centers[i].has_value() != b.centers[i].has_value()) {
            same_open = false;
            break;
        }
        if (a.centers[i]) worst = std::max(worst, std::abs(*a.centers[i] - *b.centers[i]) / std::abs(*a.centers[i]));
    }
    const bool orderings = a.orderings == b.orderings;
    report("metric-gain-invariance", same_open && worst <= kGainRelTol && orderings,
           fmt("gain x%.0f: %zu threshold cells, max relative change %.2e (tol %.0e); orderings identical: %s",
               kGainFactor, a.centers.size(), worst, kGainRelTol, orderings ? "yes" : "no"));
}

void end_to_end_toy(const fs::path& work) {
    const fs::path data = work / "toy";
    fs::remove_all(data);
    write_toy_data(data, {10, 64, 7});
    const std::string cli = INVT_CLI;
    double slowest = 0.0;
    bool ran = true;
    Json base = read_json(data / "config.json");
    for (const char* out : {"run_a", "run_b"}) {
        base["output_dir"] = out;
        const fs::path cfg = data / (std::string(out) + ".json");
        std::ofstream(cfg) << base.dump(2);
        const std::string cmd = "\"" + cli + "\" run -c \"" + cfg.string() + "\" > \"" +
                                (data / (std::string(out) + ".log")).string() + "\" 2>&1";
        const auto t0 = Clock::now();
        ran = ran && std::system(cmd.c_str()) == 0;
        slowest = std::max(slowest, seconds_since(t0));
    }
    if (!ran) {
        report("end-to-end-toy", false, "invt run exited with an error; see " + (data / "run_a.log").string());
        return;
    }
    bool identical = true;
    for (const auto& entry : fs::recursive_directory_iterator(data / "run_a" / "report")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), data / "run_a");
        identical = identical && slurp(entry.path()) == slurp(data / "run_b" / rel);
    }
    const ReportTables t = read_report_csv(data / "run_a" / "report");
    std::size_t cells = 0, finite = 0, open = 0;
    bool populated = !t.thresholds.empty();
    for (const auto& r : t.thresholds) {
        ++cells;
        if (r.center && r.lo && std::isfinite(*r.center)) {
            ++(r.hi ? finite : open);
        } else if (!r.center && !r.hi) {
            ++open;
        } else {
            populated = false;
        }
    }
    for (const auto& r : t.illuminant) {
        ++cells;
        if (r.error && std::isfinite(*r.error)) ++finite;
        else if (!r.note.empty()) ++open;
        else populated = false;
    }
    const bool families = t.thresholds.size() == 3 * 2 && t.illuminant.size() == 2;
    report("end-to-end-toy", slowest < kToySeconds && identical && populated && families,
           fmt("slowest run %.1f s (limit %.0f s); reports byte-identical: %s; %zu cells, %zu finite, %zu open-ended",
               slowest, kToySeconds, identical ? "yes" : "no", cells, finite, open));
}

void tid2013(const fs::path& work) {
    const char* cfg_path = std::getenv("INVT_TID2013_CONFIG");
    if (!cfg_path || !*cfg_path) {
        skip("tid2013-rmse", "set INVT_TID2013_CONFIG to a config over converted TID2013 data");
        return;
    }
    RunConfig cfg = load_config(cfg_path);
    cfg.metrics = {builtin_metric("rmse")};
    cfg.families = {Family::translation, Family::rotation, Family::scale};
    cfg.output_dir = work / "tid2013";
    const auto t0 = Clock::now();
    run_pipeline(cfg);
    const double secs = seconds_since(t0);
    const ReportTables t = read_report_csv(cfg.output_dir / "report");
    std::optional<double> rotation;
    for (const auto& r : t.thresholds)
        if (r.family == "rotation" && r.metric == "rmse") rotation = r.center;
    const double unit = t.metric_units.empty() ? NAN : t.metric_units.front().threshold;
    const bool pass = rotation && *rotation >= 0.05 && *rotation <= 0.2 && unit >= 0.01 && unit <= 0.04;
    report("tid2013-rmse", pass,
           fmt("rotation threshold %s deg (expected [0.05, 0.2]); metric-unit threshold %.4f (expected [0.01, "
               "0.04]); %.0f s",
               rotation ? fmt("%.4f", *rotation).c_str() : "open", unit, secs),
           false);
}

}  // namespace

int main() {
    const fs::path work = fs::path(INVT_TEST_TMP) / "acceptance";
    fs::create_directories(work);
    guarded("psychometric-recovery", psychometric_recovery);
    guarded("psychometric-analytic", psychometric_analytic);
    guarded("equalization-recovery", equalization_recovery);
    guarded("inversion-round-trip", inversion_round_trip);
    guarded("ellipse-recovery", ellipse_recovery);
    guarded("ssim-oracle", ssim_oracle);
    guarded("transform-identities", transform_identities);
    guarded("metric-gain-invariance", [&] { metric_gain_invariance(work); });
    guarded("end-to-end-toy", [&] { end_to_end_toy(work); });
    try {
        tid2013(work);
    } catch (const std::exception& e) {
        report("tid2013-rmse", false, std::string("exception: ") + e.what(), false);
    }
    std::printf("%s: %d gating failure(s)\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
