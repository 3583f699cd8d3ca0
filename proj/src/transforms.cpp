#include "invt/transforms.hpp"

#include "invt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace invt {

namespace {

struct Point {
    double x;
    double y;
};

// Source coordinate (in the unpadded frame) sampled for output pixel p.
class InverseMap {
public:
    InverseMap(const TransformSpec& spec, const ViewingGeometry& geom, std::size_t w, std::size_t h)
        : family_(spec.family), cx_((static_cast<double>(w) - 1.0) / 2.0),
          cy_((static_cast<double>(h) - 1.0) / 2.0) {
        switch (spec.family) {
        case Family::translation: {
            double shift = spec.theta * geom.pixels_per_degree;
            if (std::abs(shift - std::round(shift)) < 1e-9) shift = std::round(shift);
            dx_ = shift * spec.direction[0];
            dy_ = shift * spec.direction[1];
            break;
        }
        case Family::rotation: {
            const double a = spec.theta * std::numbers::pi / 180.0;
            cos_ = std::cos(a);
            sin_ = std::sin(a);
            break;
        }
        case Family::scale:
            inv_scale_ = 1.0 / spec.theta;
            break;
        case Family::illuminant:
            break;
        }
    }

    Point operator()(double x, double y) const noexcept {
        switch (family_) {
        case Family::translation:
            return {x - dx_, y - dy_};
        case Family::rotation: {
            // Rotates content counter-clockwise on screen (y axis points down).
            const double u = x - cx_, v = y - cy_;
            return {cx_ + cos_ * u - sin_ * v, cy_ + sin_ * u + cos_ * v};
        }
        case Family::scale:
            return {cx_ + (x - cx_) * inv_scale_, cy_ + (y - cy_) * inv_scale_};
        case Family::illuminant:
            break;
        }
        return {x, y};
    }

private:
    Family family_;
    double cx_, cy_;
    double dx_ = 0.0, dy_ = 0.0;
    double cos_ = 1.0, sin_ = 0.0;
    double inv_scale_ = 1.0;
};

std::size_t required_margin(const InverseMap& map, std::size_t w, std::size_t h) {
    const double xmax = static_cast<double>(w) - 1.0;
    const double ymax = static_cast<double>(h) - 1.0;
    double reach = 0.0;
    for (const Point corner : {Point{0, 0}, Point{xmax, 0}, Point{0, ymax}, Point{xmax, ymax}}) {
        const Point s = map(corner.x, corner.y);
        reach = std::max({reach, -s.x, s.x - xmax, -s.y, s.y - ymax});
    }
    // One extra pixel for the bilinear neighbour.
    return static_cast<std::size_t>(std::ceil(reach)) + 1;
}

ImageBuffer warp(const ImageBuffer& img, const InverseMap& map) {
    const std::size_t w = img.width(), h = img.height(), ch = img.channels();
    const std::size_t margin = required_margin(map, w, h);
    const ImageBuffer padded = mosaic_extend(img, margin);
    const double off = static_cast<double>(margin);
    const std::size_t pw = padded.width(), ph = padded.height();

    // Only the central w x h window of the warped mosaic survives the crop,
    // so the map is evaluated there directly.
    ImageBuffer mapped(pw, ph, ch);
    mapped.set_linear(img.linear());
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const Point s = map(static_cast<double>(x), static_cast<double>(y));
            const double px = std::clamp(s.x + off, 0.0, static_cast<double>(pw - 1));
            const double py = std::clamp(s.y + off, 0.0, static_cast<double>(ph - 1));
            const auto x0 = static_cast<std::size_t>(std::floor(px));
            const auto y0 = static_cast<std::size_t>(std::floor(py));
            const std::size_t x1 = std::min(x0 + 1, pw - 1);
            const std::size_t y1 = std::min(y0 + 1, ph - 1);
            const double fx = px - static_cast<double>(x0);
            const double fy = py - static_cast<double>(y0);
            for (std::size_t c = 0; c < ch; ++c) {
                const double v = (1.0 - fx) * (1.0 - fy) * padded.at(x0, y0, c) +
                                 fx * (1.0 - fy) * padded.at(x1, y0, c) +
                                 (1.0 - fx) * fy * padded.at(x0, y1, c) +
                                 fx * fy * padded.at(x1, y1, c);
                mapped.at(x + margin, y + margin, c) = static_cast<float>(v);
            }
        }
    }
    return crop_center(mapped, w, h);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

std::string_view to_string(Family f) noexcept {
    switch (f) {
    case Family::translation: return "translation";
    case Family::rotation: return "rotation";
    case Family::scale: return "scale";
    case Family::illuminant: return "illuminant";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    for (Family f : kAllFamilies)
        if (to_string(f) == name) return f;
    throw ConfigError("unknown transform family '" + std::string(name) + "'");
}

std::string_view family_units(Family f) noexcept {
    switch (f) {
    case Family::translation: return "deg visual angle";
    case Family::rotation: return "deg";
    case Family::scale: return "factor";
    case Family::illuminant: return "xy";
    }
    return "";
}

double identity_theta(Family f) noexcept { return f == Family::scale ? 1.0 : 0.0; }

bool TransformSpec::is_identity() const noexcept { return theta == identity_theta(family); }

Chromaticity TransformSpec::illuminant_target() const noexcept {
    return {kWhitePoint.x + theta * direction[0], kWhitePoint.y + theta * direction[1]};
}

double TransformSpec::folded_theta() const noexcept {
    return family == Family::rotation ? std::abs(theta) : theta;
}

void TransformSpec::validate() const {
    const auto fail = [&](const std::string& why) {
        throw ArgumentError(std::string(to_string(family)) + " theta " + format_double(theta) + ": " + why);
    };
    if (!std::isfinite(theta)) fail("not finite");
    switch (family) {
    case Family::translation:
        if (theta < 0.0) fail("must be >= 0");
        break;
    case Family::rotation:
        if (theta < -10.0 || theta > 10.0) fail("must lie in [-10, 10] degrees");
        break;
    case Family::scale:
        if (theta < 0.1 || theta > 2.0) fail("must lie in [0.1, 2]");
        break;
    case Family::illuminant:
        if (theta < 0.0) fail("radius must be >= 0");
        if (!illuminant_target().valid()) fail("target chromaticity outside the xy triangle");
        break;
    }
    if (family == Family::translation || family == Family::illuminant) {
        const double n = std::hypot(direction[0], direction[1]);
        if (std::abs(n - 1.0) > 1e-9) fail("direction must be a unit vector");
    }
}

std::string direction_label(const TransformSpec& spec) {
    if (spec.family == Family::translation) {
        const auto& d = spec.direction;
        if (d[0] > 0.5) return "right";
        if (d[0] < -0.5) return "left";
        if (d[1] > 0.5) return "down";
        if (d[1] < -0.5) return "up";
        return format_double(d[0]) + ";" + format_double(d[1]);
    }
    if (spec.family == Family::illuminant) return "hue" + std::to_string(spec.hue_index);
    return "";
}

ImageBuffer apply_transform(const ImageBuffer& img, const TransformSpec& spec,
                            const ViewingGeometry& geom) {
    spec.validate();
    if (!(geom.pixels_per_degree > 0.0)) throw ArgumentError("pixels_per_degree must be positive");
    if (spec.family == Family::illuminant && img.channels() != 3)
        throw ArgumentError("illuminant transform needs a 3-channel image");
    if (spec.is_identity()) return img;
    if (spec.family == Family::illuminant) return apply_illuminant(img, spec.illuminant_target());
    return warp(img, InverseMap(spec, geom, img.width(), img.height()));
}

ImageBuffer desaturate(const ImageBuffer& img) {
    if (img.channels() != 3) throw ArgumentError("desaturate needs a 3-channel image");
    ImageBuffer out = img;
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            Vec3 rgb{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
            if (!img.linear())
                for (double& v : rgb) v = srgb_to_linear(v);
            double g = std::clamp(luminance(rgb), 0.0, 1.0);
            if (!img.linear()) g = linear_to_srgb(g);
            for (std::size_t c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(g);
        }
    return out;
}

Vec3 illuminant_gains(const Chromaticity& target) {
    if (!target.valid()) throw ArgumentError("illuminant target outside the xy triangle");
    // Y of the target colour is 1 by construction, matching white's Y.
    return rgb_from_chromaticity(target);
}

ImageBuffer apply_illuminant(const ImageBuffer& img, const Chromaticity& target) {
    if (img.channels() != 3) throw ArgumentError("illuminant transform needs a 3-channel image");
    const Vec3 gains = illuminant_gains(target);
    ImageBuffer out = img;
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            Vec3 rgb{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
            if (!img.linear())
                for (double& v : rgb) v = srgb_to_linear(v);
            const double gray = luminance(rgb);
            for (std::size_t c = 0; c < 3; ++c) {
                double v = std::clamp(gray * gains[c], 0.0, 1.0);
                if (!img.linear()) v = linear_to_srgb(v);
                out.at(x, y, c) = static_cast<float>(v);
            }
        }
    return out;
}

const std::array<std::array<double, 2>, 4>& translation_directions() {
    static const std::array<std::array<double, 2>, 4> dirs{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};
    return dirs;
}

std::array<double, 2> hue_direction(int index, int hues) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(index) / static_cast<double>(hues);
    return {std::cos(a), std::sin(a)};
}

std::vector<TransformSpec> theta_grid(Family family, const GridConfig& cfg, std::size_t width,
                                      std::size_t height) {
    std::vector<TransformSpec> grid;
    const auto steps = [](double max, double step, const char* what) {
        if (!(step > 0.0) || !(max > 0.0) || step > max)
            throw ConfigError(std::string(what) + ": step and range must be positive with step <= range");
        return static_cast<int>(std::llround(max / step));
    };
    switch (family) {
    case Family::rotation: {
        if (cfg.rotation_max > 10.0) throw ConfigError("rotation range is limited to 10 degrees");
        const int k = steps(cfg.rotation_max, cfg.rotation_step, "rotation grid");
        for (int i = -k; i <= k; ++i)
            grid.push_back({Family::rotation, std::clamp(i * cfg.rotation_step, -10.0, 10.0)});
        break;
    }
    case Family::translation: {
        const int k = steps(cfg.translation_max, cfg.translation_step, "translation grid");
        grid.push_back({Family::translation, 0.0, translation_directions()[0]});
        for (const auto& dir : translation_directions())
            for (int i = 1; i <= k; ++i) grid.push_back({Family::translation, i * cfg.translation_step, dir});
        break;
    }
    case Family::scale: {
        if (!(cfg.scale_min >= 0.1) || !(cfg.scale_max <= 2.0) || !(cfg.scale_min < cfg.scale_max) ||
            cfg.scale_min > 1.0 || cfg.scale_max < 1.0)
            throw ConfigError("scale grid must satisfy 0.1 <= min <= 1 <= max <= 2 with min < max");
        if (width == 0 || height == 0) throw ConfigError("scale grid needs the image size");
        const double w = static_cast<double>(width);
        const double h = static_cast<double>(height);
        bool has_identity = false;
        const auto lo = static_cast<long long>(std::ceil(cfg.scale_min * w - 1e-9));
        const auto hi = static_cast<long long>(std::floor(cfg.scale_max * w + 1e-9));
        for (long long s = lo + (lo % 2 != 0 ? 1 : 0); s <= hi; s += 2) {
            const double f = static_cast<double>(s) / w;
            if (f < cfg.scale_min || f > cfg.scale_max) continue;
            if (std::llround(h * f) % 2 != 0) continue;
            if (s == static_cast<long long>(width)) {
                has_identity = true;
                grid.push_back({Family::scale, 1.0});
                continue;
            }
            grid.push_back({Family::scale, f});
        }
        if (!has_identity) {
            grid.push_back({Family::scale, 1.0});
            std::sort(grid.begin(), grid.end(),
                      [](const TransformSpec& a, const TransformSpec& b) { return a.theta < b.theta; });
        }
        break;
    }
    case Family::illuminant: {
        if (cfg.hues < 1 || cfg.saturations < 1 || !(cfg.saturation_max > 0.0))
            throw ConfigError("illuminant grid needs positive hue and saturation counts and radius");
        for (int hue = 0; hue < cfg.hues; ++hue) {
            const auto dir = hue_direction(hue, cfg.hues);
            for (int s = 1; s <= cfg.saturations; ++s) {
                TransformSpec spec{Family::illuminant, cfg.saturation_max * s / cfg.saturations, dir, hue};
                spec.validate();
                grid.push_back(spec);
            }
        }
        break;
    }
    }
    return grid;
}

}  // namespace invt
