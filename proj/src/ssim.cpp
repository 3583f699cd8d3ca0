#include "invt/ssim.hpp"

#include "invt/color.hpp"
#include "invt/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace invt {

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - c;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Plane of doubles with its own width; the valid filter shrinks it.
struct Plane {
    std::size_t w = 0, h = 0;
    std::vector<double> v;
    double operator()(std::size_t x, std::size_t y) const { return v[y * w + x]; }
};

Plane filter_valid(const Plane& in, const std::vector<double>& k) {
    const std::size_t n = k.size();
    Plane rows{in.w - n + 1, in.h, std::vector<double>((in.w - n + 1) * in.h)};
    for (std::size_t y = 0; y < in.h; ++y)
        for (std::size_t x = 0; x < rows.w; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += k[i] * in(x + i, y);
            rows.v[y * rows.w + x] = acc;
        }
    Plane out{rows.w, in.h - n + 1, std::vector<double>(rows.w * (in.h - n + 1))};
    for (std::size_t y = 0; y < out.h; ++y)
        for (std::size_t x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += k[i] * rows(x, y + i);
            out.v[y * out.w + x] = acc;
        }
    return out;
}

Plane to_plane(const ImageBuffer& img) {
    Plane p{img.width(), img.height(), std::vector<double>(img.size())};
    const auto s = img.samples();
    for (std::size_t i = 0; i < s.size(); ++i) p.v[i] = s[i];
    return p;
}

}  // namespace

ImageBuffer linear_luminance(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height(), 1);
    out.set_linear(true);
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            if (img.channels() == 1) {
                const double v = img.at(x, y);
                out.at(x, y) = static_cast<float>(img.linear() ? v : srgb_to_linear(v));
                continue;
            }
            Vec3 rgb{img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)};
            if (!img.linear())
                for (double& v : rgb) v = srgb_to_linear(v);
            out.at(x, y) = static_cast<float>(luminance(rgb));
        }
    return out;
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& p) {
    if (!a.same_shape(b)) throw ArgumentError("ssim: images differ in shape");
    const auto win = static_cast<std::size_t>(p.window);
    if (a.width() < win || a.height() < win)
        throw ArgumentError("ssim needs images of at least " + std::to_string(win) + "x" + std::to_string(win));

    const Plane x = to_plane(linear_luminance(a));
    const Plane y = to_plane(linear_luminance(b));
    Plane xx = x, yy = y, xy = x;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        xx.v[i] = x.v[i] * x.v[i];
        yy.v[i] = y.v[i] * y.v[i];
        xy.v[i] = x.v[i] * y.v[i];
    }
    const auto k = gaussian_kernel(p.window, p.sigma);
    const Plane mx = filter_valid(x, k), my = filter_valid(y, k);
    const Plane sxx = filter_valid(xx, k), syy = filter_valid(yy, k), sxy = filter_valid(xy, k);

    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.v.size(); ++i) {
        const double mu1 = mx.v[i], mu2 = my.v[i];
        const double var1 = sxx.v[i] - mu1 * mu1;
        const double var2 = syy.v[i] - mu2 * mu2;
        const double cov = sxy.v[i] - mu1 * mu2;
        acc += ((2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)) /
               ((mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2));
    }
    return acc / static_cast<double>(mx.v.size());
}

}  // namespace invt
