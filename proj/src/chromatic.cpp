#include "invt/chromatic.hpp"

#include "invt/error.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace invt {

double Ellipse::radius(double phi) const noexcept {
    const double t = phi - angle;
    const double bc = semi_minor * std::cos(t), as = semi_major * std::sin(t);
    return semi_major * semi_minor / std::sqrt(bc * bc + as * as);
}

void Ellipse::validate() const {
    if (!(semi_minor > 0.0) || !(semi_major >= semi_minor) || !std::isfinite(semi_major))
        throw ArgumentError("ellipse needs semi_major >= semi_minor > 0");
    if (!(angle >= 0.0 && angle < std::numbers::pi)) throw ArgumentError("ellipse angle must lie in [0, pi)");
}

std::vector<Chromaticity> radial_threshold_points(const Chromaticity& center,
                                                  std::span<const std::array<double, 2>> directions,
                                                  std::span<const double> radii) {
    if (directions.size() != radii.size()) throw ArgumentError("one radius per direction is required");
    if (directions.size() < 4)
        throw InsufficientDataError("a fixed-center ellipse needs at least 4 radial thresholds");
    std::vector<Chromaticity> out;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || !std::isfinite(radii[i]))
            throw ArgumentError("radial threshold " + std::to_string(i) + " must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (directions[j] == directions[i]) throw ArgumentError("radial directions must be distinct");
        out.push_back({center.x + radii[i] * directions[i][0], center.y + radii[i] * directions[i][1]});
    }
    return out;
}

EllipseFit fit_ellipse_fixed_center(std::span<const Chromaticity> points, const Chromaticity& center) {
    if (points.size() < 4) throw InsufficientDataError("a fixed-center ellipse needs at least 4 points");
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd m(n, 3);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
    // Each row is divided by |p|^2, so the residual is measured in 1/r^2.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = points[i].x - center.x, v = points[i].y - center.y;
        const double r2 = u * u + v * v;
        if (!(r2 > 0.0)) throw ArgumentError("ellipse point coincides with the center");
        m(i, 0) = u * u / r2;
        m(i, 1) = u * v / r2;
        m(i, 2) = v * v / r2;
        rhs(i) = 1.0 / r2;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    cod.setThreshold(1e-10);
    if (cod.rank() < 2) throw InsufficientDataError("ellipse points span fewer than two directions");
    const Eigen::Vector3d abc = cod.solve(rhs);

    Eigen::Matrix2d q;
    q << abc(0), abc(1) / 2.0, abc(1) / 2.0, abc(2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
    const Eigen::Vector2d lam = es.eigenvalues();  // ascending
    if (!(lam(0) > 0.0)) throw FitError("fitted conic is not an ellipse (indefinite quadratic form)");

    Ellipse e;
    e.center = center;
    e.semi_major = 1.0 / std::sqrt(lam(0));
    e.semi_minor = 1.0 / std::sqrt(lam(1));
    if (lam(1) - lam(0) <= 1e-12 * lam(1)) {
        e.semi_major = e.semi_minor = 1.0 / std::sqrt(0.5 * (lam(0) + lam(1)));
        e.angle = 0.0;
    } else {
        const Eigen::Vector2d v = es.eigenvectors().col(0);
        double a = std::atan2(v(1), v(0));
        if (a < 0.0) a += std::numbers::pi;
        if (a >= std::numbers::pi) a -= std::numbers::pi;
        e.angle = a;
    }

    double ss = 0.0;
    for (const auto& p : points) {
        const double u = p.x - center.x, v = p.y - center.y;
        const double d = std::hypot(u, v) - e.radius(std::atan2(v, u));
        ss += d * d;
    }
    return {e, std::sqrt(ss / static_cast<double>(points.size()))};
}

double ellipse_rmse(const Ellipse& e1, const Ellipse& e2) {
    if (std::abs(e1.center.x - e2.center.x) > 1e-12 || std::abs(e1.center.y - e2.center.y) > 1e-12)
        throw ArgumentError("ellipse_rmse needs ellipses with a shared center");
    double ss = 0.0;
    for (int k = 0; k < kEllipseSamples; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / kEllipseSamples;
        const double d = e1.radius(phi) - e2.radius(phi);
        ss += d * d;
    }
    return std::sqrt(ss / kEllipseSamples);
}

Ellipse scale_ellipse(const Ellipse& e, double factor) {
    if (!(factor > 0.0)) throw ArgumentError("ellipse scale factor must be positive");
    Ellipse out = e;
    out.semi_major *= factor;
    out.semi_minor *= factor;
    return out;
}

std::vector<Chromaticity> ellipse_outline(const Ellipse& e, int samples) {
    std::vector<Chromaticity> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / samples;
        const double r = e.radius(phi);
        out.push_back({e.center.x + r * std::cos(phi), e.center.y + r * std::sin(phi)});
    }
    return out;
}

MetricEllipse ellipse_from_curves(std::span<const ResponseCurve> hue_curves, int hues, double level,
                                  const Chromaticity& center) {
    MetricEllipse out;
    std::vector<Chromaticity> points;
    for (const auto& c : hue_curves) {
        if (c.family != Family::illuminant || c.hue_index < 0)
            throw ArgumentError("ellipse_from_curves needs per-hue illuminant curves");
        if (!c.equalized) throw ArgumentError("ellipse_from_curves needs equalized curves");
        const auto r = first_crossing(c.thetas, *c.equalized, level, c.identity_index());
        if (!r || !(*r > 0.0)) {
            out.dropped.push_back(c.hue_index);
            continue;
        }
        const auto dir = hue_direction(c.hue_index, hues);
        out.hues.push_back(c.hue_index);
        out.radii.push_back(*r);
        points.push_back({center.x + *r * dir[0], center.y + *r * dir[1]});
    }
    if (points.size() < 4)
        throw InsufficientDataError("only " + std::to_string(points.size()) +
                                    " hue directions reach the threshold; an ellipse needs 4");
    out.fit = fit_ellipse_fixed_center(points, center);
    return out;
}

std::vector<TransformSpec> hue_grid(const GridConfig& grid, int hue) {
    std::vector<TransformSpec> out;
    const auto dir = hue_direction(hue, grid.hues);
    out.push_back({Family::illuminant, 0.0, dir, hue});
    for (const auto& s : theta_grid(Family::illuminant, grid, 1, 1))
        if (s.hue_index == hue) out.push_back(s);
    return out;
}

MetricEllipse metric_ellipse(Metric& metric, std::span<const ImageBuffer> images, const GridConfig& grid,
                             const ViewingGeometry& geom, const EqualizationFit& fit, double d_tau,
                             const ResponseOptions& options) {
    std::vector<ResponseCurve> curves;
    for (int h = 0; h < grid.hues; ++h) {
        const auto specs = hue_grid(grid, h);
        curves.push_back(transduce(response_curve(metric, images, specs, geom, options), fit));
    }
    return ellipse_from_curves(curves, grid.hues, d_tau);
}

}  // namespace invt
