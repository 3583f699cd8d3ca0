#include "invt/transduction.hpp"

#include "invt/error.hpp"
#include "invt/isotonic.hpp"
#include "invt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace invt {

namespace {

constexpr double kMinExponent = 0.05;
constexpr double kExponentSpan = 4.95;  // b in [0.05, 5]

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

double exponent_from(double beta) noexcept { return kMinExponent + kExponentSpan * sigmoid(beta); }

double beta_from(double b) noexcept {
    const double u = std::clamp((b - kMinExponent) / kExponentSpan, 1e-9, 1.0 - 1e-9);
    return std::log(u / (1.0 - u));
}

struct PositivePairs {
    std::vector<double> d;
    std::vector<double> D;
};

PositivePairs positive_pairs(std::span<const double> d, std::span<const double> D) {
    if (d.size() != D.size()) throw ArgumentError("equalization: d and D differ in length");
    if (d.empty()) throw ArgumentError("equalization: no data");
    PositivePairs p;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i]) || d[i] < 0.0) throw ArgumentError("equalization: distances must be >= 0");
        if (!std::isfinite(D[i]) || D[i] < 0.0 || D[i] > 1.0)
            throw ArgumentError("equalization: normalized scores must lie in [0, 1]");
        if (d[i] > 0.0) {
            p.d.push_back(d[i]);
            p.D.push_back(D[i]);
        }
    }
    if (p.d.size() < 3)
        throw InsufficientDataError("equalization needs at least 3 pairs with positive distance, got " +
                                    std::to_string(p.d.size()));
    return p;
}

double rms_residual(const PositivePairs& p, double a, double b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.d.size(); ++i) {
        const double r = a * std::pow(p.d[i], b) - p.D[i];
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(p.d.size()));
}

EqualizationFit loglog(const PositivePairs& p) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < p.d.size(); ++i) {
        if (p.D[i] <= 0.0) continue;
        const double x = std::log(p.d[i]), y = std::log(p.D[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    double a = 1.0, b = 1.0;
    const double den = n * sxx - sx * sx;
    if (n >= 2 && den > 0.0) {
        b = (n * sxy - sx * sy) / den;
        a = std::exp((sy - b * sx) / n);
    } else {
        double md = 0, mD = 0;
        for (std::size_t i = 0; i < p.d.size(); ++i) {
            md += p.d[i];
            mD += p.D[i];
        }
        a = mD > 0.0 ? mD / md : 1.0;
    }
    b = std::clamp(b, kMinExponent, kMinExponent + kExponentSpan);
    return {a, b, rms_residual(p, a, b), p.d.size()};
}

}  // namespace

std::size_t ResponseCurve::identity_index() const {
    const double id = identity_theta(family);
    for (std::size_t i = 0; i < thetas.size(); ++i)
        if (thetas[i] == id) return i;
    throw ArgumentError("response curve has no identity element");
}

void ResponseCurve::validate() const {
    if (thetas.size() != raw.size() || (!energy.empty() && energy.size() != thetas.size()) ||
        (equalized && equalized->size() != thetas.size()))
        throw ArgumentError("response curve arrays differ in length");
    for (std::size_t i = 1; i < thetas.size(); ++i)
        if (!(thetas[i] > thetas[i - 1])) throw ArgumentError("response curve thetas must increase strictly");
    if (raw[identity_index()] != 0.0) throw ArgumentError("response at the identity must be 0");
}

double EqualizationFit::operator()(double d) const noexcept { return d > 0.0 ? a * std::pow(d, b) : 0.0; }

bool ThresholdInterval::contains(double value) const noexcept {
    const double l = lo.value_or(theta_max);
    const double h = hi.value_or(std::numeric_limits<double>::infinity());
    return value >= l && value <= h;
}

ResponseCurve response_curve(Metric& metric, std::span<const ImageBuffer> images,
                             std::span<const TransformSpec> grid, const ViewingGeometry& geom,
                             const ResponseOptions& options) {
    if (images.empty()) throw ArgumentError("response curve needs at least one image");
    if (grid.empty()) throw ArgumentError("response curve needs a nonempty grid");
    const Family family = grid.front().family;
    bool has_identity = false;
    for (const auto& s : grid) {
        if (s.family != family) throw ArgumentError("response curve grid mixes families");
        has_identity = has_identity || s.is_identity();
    }
    if (!has_identity) throw ArgumentError("response curve grid must contain the identity element");

    // Folded intensity -> slot; symmetric grid elements share a slot.
    std::map<double, std::size_t> slot_of;
    for (const auto& s : grid) slot_of.emplace(s.folded_theta(), 0);
    std::size_t k = 0;
    for (auto& [theta, slot] : slot_of) slot = k++;
    std::vector<std::size_t> slot(grid.size());
    std::vector<double> members(slot_of.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        slot[g] = slot_of.at(grid[g].folded_theta());
        members[slot[g]] += 1.0;
    }

    // Per-image sums, reduced in image order afterwards for determinism.
    std::vector<std::vector<double>> dist(images.size(), std::vector<double>(grid.size()));
    std::vector<std::vector<double>> energy(images.size(), std::vector<double>(grid.size()));
    const auto run_image = [&](std::size_t i) {
        const ImageBuffer& ref = images[i];
        std::vector<ImageBuffer> distorted;
        distorted.reserve(grid.size());
        for (const auto& spec : grid) {
            ImageBuffer out = apply_transform(ref, spec, geom);
            if (options.quantize && !spec.is_identity()) out = quantize8(out);
            distorted.push_back(std::move(out));
        }
        std::vector<ImagePair> pairs;
        for (const auto& d : distorted) pairs.push_back({&ref, &d});
        std::vector<double> values;
        try {
            values = metric.distances(std::span<const ImagePair>(pairs));
        } catch (const MetricError& e) {
            throw MetricError("image " + std::to_string(i) + ", " + std::string(to_string(family)) +
                                  " grid: " + e.what(),
                              e.transcript());
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            dist[i][g] = grid[g].is_identity() ? 0.0 : values[g];
            energy[i][g] = rmse_energy(ref, distorted[g]);
        }
    };
    parallel_for(images.size(), metric.concurrent() ? options.threads : 1u, run_image);

    ResponseCurve curve;
    curve.metric = metric.name();
    curve.family = family;
    curve.hue_index = grid.front().hue_index;
    curve.n_images = images.size();
    curve.thetas.reserve(slot_of.size());
    for (const auto& [theta, s] : slot_of) curve.thetas.push_back(theta);
    curve.raw.assign(slot_of.size(), 0.0);
    curve.energy.assign(slot_of.size(), 0.0);
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t g = 0; g < grid.size(); ++g) {
            curve.raw[slot[g]] += dist[i][g];
            curve.energy[slot[g]] += energy[i][g];
        }
    const double n = static_cast<double>(images.size());
    for (std::size_t s = 0; s < curve.raw.size(); ++s) {
        curve.raw[s] /= n * members[s];
        curve.energy[s] /= n * members[s];
    }
    return curve;
}

std::vector<double> normalize_dmos(std::span<const double> mos, bool higher_is_better) {
    if (mos.empty()) throw ArgumentError("normalize_dmos: no scores");
    const auto [mn, mx] = std::minmax_element(mos.begin(), mos.end());
    const double lo = *mn, hi = *mx;
    if (!(hi > lo)) throw ArgumentError("normalize_dmos: constant scores give a degenerate scale");
    std::vector<double> out;
    out.reserve(mos.size());
    for (double m : mos) out.push_back(higher_is_better ? (hi - m) / (hi - lo) : (m - lo) / (hi - lo));
    return out;
}

EqualizationFit loglog_initial_fit(std::span<const double> d, std::span<const double> D) {
    return loglog(positive_pairs(d, D));
}

EqualizationFit fit_equalization(std::span<const double> d, std::span<const double> D) {
    const PositivePairs p = positive_pairs(d, D);
    const EqualizationFit init = loglog(p);

    double alpha = std::log(init.a);
    double beta = beta_from(init.b);
    const auto cost_at = [&](double al, double be) {
        const double a = std::exp(al), b = exponent_from(be);
        double acc = 0.0;
        for (std::size_t i = 0; i < p.d.size(); ++i) {
            const double r = a * std::pow(p.d[i], b) - p.D[i];
            acc += r * r;
        }
        return acc;
    };

    double cost = cost_at(alpha, beta);
    double lambda = 1e-3;
    for (int iter = 0; iter < 500 && cost > 0.0; ++iter) {
        const double a = std::exp(alpha), b = exponent_from(beta);
        const double s = sigmoid(beta);
        const double db = kExponentSpan * s * (1.0 - s);
        // Normal equations of the 2-parameter Gauss-Newton step.
        double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < p.d.size(); ++i) {
            const double f = a * std::pow(p.d[i], b);
            const double r = f - p.D[i];
            const double ja = f;
            const double jb = f * std::log(p.d[i]) * db;
            j11 += ja * ja;
            j12 += ja * jb;
            j22 += jb * jb;
            g1 += ja * r;
            g2 += jb * r;
        }
        bool improved = false;
        while (lambda < 1e16) {
            const double h11 = j11 * (1.0 + lambda), h22 = j22 * (1.0 + lambda);
            const double det = h11 * h22 - j12 * j12;
            if (!(det > 0.0) || !std::isfinite(det)) {
                lambda *= 10.0;
                continue;
            }
            const double da = -(h22 * g1 - j12 * g2) / det;
            const double dbeta = -(h11 * g2 - j12 * g1) / det;
            const double trial = cost_at(alpha + da, beta + dbeta);
            if (std::isfinite(trial) && trial < cost) {
                const bool tiny = std::abs(da) < 1e-15 * (1.0 + std::abs(alpha)) &&
                                  std::abs(dbeta) < 1e-15 * (1.0 + std::abs(beta));
                const double rel = (cost - trial) / cost;
                alpha += da;
                beta += dbeta;
                cost = trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = !tiny && rel > 1e-16;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }

    EqualizationFit fit{std::exp(alpha), exponent_from(beta), 0.0, p.d.size()};
    fit.residual = std::sqrt(cost / static_cast<double>(p.d.size()));
    // The refinement only accepts improving steps; keep the start if the
    // parameter transform itself cost precision.
    if (fit.residual > init.residual) return init;
    return fit;
}

ResponseCurve transduce(const ResponseCurve& curve, const EqualizationFit& fit) {
    ResponseCurve out = curve;
    std::vector<double> eq(curve.raw.size());
    for (std::size_t j = 0; j < eq.size(); ++j) eq[j] = fit(curve.raw[j]);
    out.equalized = std::move(eq);
    return out;
}

std::optional<double> first_crossing(std::span<const double> thetas, std::span<const double> values, double level,
                                     std::size_t start) {
    if (thetas.size() != values.size()) throw ArgumentError("first_crossing: length mismatch");
    if (start >= thetas.size()) throw ArgumentError("first_crossing: start outside the curve");
    const auto smooth = isotonic_increasing(values.subspan(start));
    if (level <= smooth.front()) return thetas[start];
    for (std::size_t j = 1; j < smooth.size(); ++j) {
        if (smooth[j] >= level) {
            const double t0 = thetas[start + j - 1], t1 = thetas[start + j];
            const double y0 = smooth[j - 1], y1 = smooth[j];
            return t0 + (level - y0) / (y1 - y0) * (t1 - t0);
        }
    }
    return std::nullopt;
}

ThresholdInterval invert_threshold(const ResponseCurve& curve, double d_tau, double d_tau_lo, double d_tau_hi) {
    if (!curve.equalized) throw ArgumentError("invert_threshold needs an equalized curve");
    if (!(d_tau_lo <= d_tau && d_tau <= d_tau_hi)) throw ArgumentError("threshold quartiles must bracket D_tau");
    if (d_tau < 0.0) throw ArgumentError("D_tau must be >= 0");
    curve.validate();
    const std::size_t start = curve.identity_index();
    ThresholdInterval out;
    out.identity = curve.thetas[start];
    out.theta_max = curve.thetas.back();
    out.metric = curve.metric;
    out.family = curve.family;
    out.dataset = curve.dataset;
    out.center = first_crossing(curve.thetas, *curve.equalized, d_tau, start);
    out.lo = first_crossing(curve.thetas, *curve.equalized, std::max(0.0, d_tau_lo), start);
    out.hi = first_crossing(curve.thetas, *curve.equalized, d_tau_hi, start);
    return out;
}

double metric_unit_threshold(const EqualizationFit& fit, double d_tau) {
    if (!(fit.a > 0.0) || !(fit.b > 0.0)) throw ArgumentError("equalization parameters must be positive");
    return std::pow(d_tau / fit.a, 1.0 / fit.b);
}

}  // namespace invt
