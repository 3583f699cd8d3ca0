#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace invt {

/// Floating-point raster with samples in [0,1], row-major, channels interleaved.
/// Samples are display-referred (sRGB-encoded) unless `linear()` is set.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(std::size_t width, std::size_t height, std::size_t channels, float fill = 0.0f);
    ImageBuffer(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    bool linear() const noexcept { return linear_; }
    void set_linear(bool v) noexcept { linear_ = v; }

    float& at(std::size_t x, std::size_t y, std::size_t c = 0) noexcept {
        return data_[(y * width_ + x) * channels_ + c];
    }
    float at(std::size_t x, std::size_t y, std::size_t c = 0) const noexcept {
        return data_[(y * width_ + x) * channels_ + c];
    }

    std::span<float> samples() noexcept { return data_; }
    std::span<const float> samples() const noexcept { return data_; }

    bool same_shape(const ImageBuffer& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    bool linear_ = false;
    std::vector<float> data_;
};

/// Mirror-pads by `margin` pixels on every side. Reflection is about the edge
/// sample (it is not repeated): row [a,b,c] padded by 2 gives [c,b,a,b,c,b,a].
/// Requires margin <= min(width, height).
ImageBuffer mosaic_pad(const ImageBuffer& img, std::size_t margin);

/// Same as mosaic_pad but without the margin bound: repeats reflection so
/// arbitrarily large margins produce the periodic mirror tiling.
ImageBuffer mosaic_extend(const ImageBuffer& img, std::size_t margin);

/// Places `img` on a zero canvas; odd slack puts the extra pixel right/bottom.
ImageBuffer pad_black(const ImageBuffer& img, std::size_t target_w, std::size_t target_h);

/// Central w x h window; odd slack is trimmed from the right/bottom.
ImageBuffer crop_center(const ImageBuffer& img, std::size_t w, std::size_t h);

ImageBuffer srgb_to_linear(const ImageBuffer& img);
ImageBuffer linear_to_srgb(const ImageBuffer& img);
double srgb_to_linear(double v) noexcept;
double linear_to_srgb(double v) noexcept;

/// Replicates a single-channel image into three channels; 3-channel input is returned as-is.
ImageBuffer to_rgb(const ImageBuffer& img);

/// Rounds every sample to the nearest multiple of 1/255.
ImageBuffer quantize8(const ImageBuffer& img);

/// Root-mean-square difference over all samples (pixels and channels).
double rmse_energy(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace invt
