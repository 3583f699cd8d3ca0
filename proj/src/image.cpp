#include "invt/image.hpp"

#include "invt/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace invt {

namespace {

// Index into [0, n) of the symmetric (edge-not-repeated) periodic extension.
std::size_t reflect_index(long long i, std::size_t n) noexcept {
    if (n == 1) return 0;
    const long long period = 2 * (static_cast<long long>(n) - 1);
    long long m = i % period;
    if (m < 0) m += period;
    if (m >= static_cast<long long>(n)) m = period - m;
    return static_cast<std::size_t>(m);
}

ImageBuffer reflect_pad(const ImageBuffer& img, std::size_t margin) {
    const std::size_t w = img.width() + 2 * margin;
    const std::size_t h = img.height() + 2 * margin;
    const std::size_t ch = img.channels();
    ImageBuffer out(w, h, ch);
    out.set_linear(img.linear());
    const auto m = static_cast<long long>(margin);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t sy = reflect_index(static_cast<long long>(y) - m, img.height());
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t sx = reflect_index(static_cast<long long>(x) - m, img.width());
            for (std::size_t c = 0; c < ch; ++c) out.at(x, y, c) = img.at(sx, sy, c);
        }
    }
    return out;
}

template <class F>
ImageBuffer map_samples(const ImageBuffer& img, F&& f) {
    ImageBuffer out = img;
    for (float& v : out.samples()) v = static_cast<float>(f(static_cast<double>(v)));
    return out;
}

}  // namespace

ImageBuffer::ImageBuffer(std::size_t width, std::size_t height, std::size_t channels, float fill)
    : width_(width), height_(height), channels_(channels), data_(width * height * channels, fill) {
    if (channels != 1 && channels != 3)
        throw ArgumentError("image must have 1 or 3 channels, got " + std::to_string(channels));
}

ImageBuffer::ImageBuffer(std::size_t width, std::size_t height, std::size_t channels,
                         std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (channels != 1 && channels != 3)
        throw ArgumentError("image must have 1 or 3 channels, got " + std::to_string(channels));
    if (data_.size() != width * height * channels)
        throw ArgumentError("sample count " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height) + "x" + std::to_string(channels));
}

ImageBuffer mosaic_pad(const ImageBuffer& img, std::size_t margin) {
    if (margin > std::min(img.width(), img.height()))
        throw ArgumentError("mosaic margin " + std::to_string(margin) + " exceeds image size " +
                            std::to_string(img.width()) + "x" + std::to_string(img.height()));
    if (margin == 0) return img;
    return reflect_pad(img, margin);
}

ImageBuffer mosaic_extend(const ImageBuffer& img, std::size_t margin) {
    if (img.empty()) throw ArgumentError("cannot extend an empty image");
    if (margin == 0) return img;
    return reflect_pad(img, margin);
}

ImageBuffer pad_black(const ImageBuffer& img, std::size_t target_w, std::size_t target_h) {
    if (target_w < img.width() || target_h < img.height())
        throw ArgumentError("pad target " + std::to_string(target_w) + "x" +
                            std::to_string(target_h) + " is smaller than the image");
    ImageBuffer out(target_w, target_h, img.channels());
    out.set_linear(img.linear());
    const std::size_t ox = (target_w - img.width()) / 2;
    const std::size_t oy = (target_h - img.height()) / 2;
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x)
            for (std::size_t c = 0; c < img.channels(); ++c)
                out.at(x + ox, y + oy, c) = img.at(x, y, c);
    return out;
}

ImageBuffer crop_center(const ImageBuffer& img, std::size_t w, std::size_t h) {
    if (w > img.width() || h > img.height())
        throw ArgumentError("crop " + std::to_string(w) + "x" + std::to_string(h) +
                            " is larger than the image " + std::to_string(img.width()) + "x" +
                            std::to_string(img.height()));
    if (w == img.width() && h == img.height()) return img;
    ImageBuffer out(w, h, img.channels());
    out.set_linear(img.linear());
    const std::size_t ox = (img.width() - w) / 2;
    const std::size_t oy = (img.height() - h) / 2;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < img.channels(); ++c)
                out.at(x, y, c) = img.at(x + ox, y + oy, c);
    return out;
}

double srgb_to_linear(double v) noexcept {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) noexcept {
    return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

ImageBuffer srgb_to_linear(const ImageBuffer& img) {
    if (img.linear()) return img;
    ImageBuffer out = map_samples(img, [](double v) { return srgb_to_linear(v); });
    out.set_linear(true);
    return out;
}

ImageBuffer linear_to_srgb(const ImageBuffer& img) {
    if (!img.linear()) return img;
    ImageBuffer out = map_samples(img, [](double v) { return linear_to_srgb(v); });
    out.set_linear(false);
    return out;
}

ImageBuffer to_rgb(const ImageBuffer& img) {
    if (img.channels() == 3) return img;
    ImageBuffer out(img.width(), img.height(), 3);
    out.set_linear(img.linear());
    const auto src = img.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < src.size(); ++i) dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
    return out;
}

ImageBuffer quantize8(const ImageBuffer& img) {
    return map_samples(img, [](double v) {
        return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    });
}

double rmse_energy(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b))
        throw ArgumentError("rmse_energy: shape mismatch " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
                            " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                            "x" + std::to_string(b.channels()));
    if (a.empty()) return 0.0;
    const auto sa = a.samples();
    const auto sb = b.samples();
    double acc = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double d = static_cast<double>(sa[i]) - static_cast<double>(sb[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(sa.size()));
}

}  // namespace invt
