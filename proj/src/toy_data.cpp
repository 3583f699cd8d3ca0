#include "invt/toy_data.hpp"

#include "invt/csv.hpp"
#include "invt/error.hpp"
#include "invt/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace invt {

namespace fs = std::filesystem;

ImageBuffer procedural_image(std::size_t width, std::size_t height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageBuffer img(width, height, 3);
    struct Wave {
        double fx, fy, phase, amp;
    };
    std::array<std::vector<Wave>, 3> waves;
    for (auto& ch : waves)
        for (int k = 0; k < 6; ++k)
            ch.push_back({(u(rng) - 0.5) * 0.5, (u(rng) - 0.5) * 0.5, u(rng) * 2.0 * std::numbers::pi,
                          0.25 / (1.0 + k)});
    std::array<double, 3> base{u(rng) * 0.4 + 0.3, u(rng) * 0.4 + 0.3, u(rng) * 0.4 + 0.3};
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                double v = base[c];
                for (const auto& w : waves[c])
                    v += w.amp * std::sin(w.fx * static_cast<double>(x) + w.fy * static_cast<double>(y) + w.phase);
                img.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
    const int shapes = 3 + static_cast<int>(u(rng) * 3);
    for (int s = 0; s < shapes; ++s) {
        const double cx = u(rng) * width, cy = u(rng) * height;
        const double r = (0.08 + u(rng) * 0.15) * static_cast<double>(std::min(width, height));
        const bool disc = u(rng) < 0.5;
        const std::array<double, 3> col{u(rng), u(rng), u(rng)};
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                const bool inside = disc ? dx * dx + dy * dy <= r * r : std::abs(dx) <= r && std::abs(dy) <= r;
                if (inside)
                    for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(col[c]);
            }
    }
    return img;
}

namespace {

ImageBuffer add_noise(const ImageBuffer& img, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, sigma);
    ImageBuffer out = img;
    for (auto& v : out.samples()) v = static_cast<float>(std::clamp(v + n(rng), 0.0, 1.0));
    return out;
}

ImageBuffer box_blur(const ImageBuffer& img, int radius) {
    ImageBuffer out = img;
    const auto w = static_cast<long>(img.width()), h = static_cast<long>(img.height());
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x)
            for (std::size_t c = 0; c < img.channels(); ++c) {
                double s = 0.0;
                int n = 0;
                for (long dy = -radius; dy <= radius; ++dy)
                    for (long dx = -radius; dx <= radius; ++dx) {
                        const long xx = std::clamp(x + dx, 0L, w - 1), yy = std::clamp(y + dy, 0L, h - 1);
                        s += img.at(static_cast<std::size_t>(xx), static_cast<std::size_t>(yy), c);
                        ++n;
                    }
                out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) = static_cast<float>(s / n);
            }
    return out;
}

ImageBuffer contrast(const ImageBuffer& img, double gain) {
    ImageBuffer out = img;
    for (auto& v : out.samples()) v = static_cast<float>(std::clamp(0.5 + gain * (v - 0.5), 0.0, 1.0));
    return out;
}

}  // namespace

void write_toy_data(const fs::path& dir, const ToyDataOptions& opt) {
    if (opt.images == 0 || opt.size < 16) throw ArgumentError("toy data needs at least one image of 16 px or more");
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "rated");
    std::vector<ImageBuffer> sources;
    for (std::size_t i = 0; i < opt.images; ++i) {
        sources.push_back(quantize8(procedural_image(opt.size, opt.size, opt.seed * 1000 + i)));
        char name[32];
        std::snprintf(name, sizeof name, "img%03zu.png", i);
        save_image(sources.back(), dir / "images" / name);
    }

    // Rated pairs: the synthetic observer's score follows a concave power of
    // the RMS error, plus rating noise.
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> rating_noise(0.0, 0.15);
    std::ofstream csv_out(dir / "rated" / "ratings.csv", std::ios::binary | std::ios::trunc);
    csv::write_row(csv_out, {"reference", "distorted", "mos"});
    const std::size_t refs = std::min<std::size_t>(opt.images, 5);
    std::size_t k = 0;
    for (std::size_t r = 0; r < refs; ++r) {
        const std::string ref_name = "ref" + std::to_string(r) + ".png";
        save_image(sources[r], dir / "rated" / ref_name);
        std::vector<ImageBuffer> distorted;
        for (double s : {0.005, 0.01, 0.02, 0.04, 0.08, 0.16}) distorted.push_back(add_noise(sources[r], s, rng));
        for (int b : {1, 2, 3}) distorted.push_back(box_blur(sources[r], b));
        for (double g : {0.9, 0.75, 0.5, 0.25}) distorted.push_back(contrast(sources[r], g));
        for (auto& d : distorted) {
            d = quantize8(d);
            const std::string name = "dist" + std::to_string(k++) + ".png";
            save_image(d, dir / "rated" / name);
            const double dmos = std::min(1.0, 1.6 * std::pow(rmse_energy(sources[r], d), 0.6));
            const double mos = std::clamp(9.0 * (1.0 - dmos) + rating_noise(rng), 0.0, 9.0);
            csv::write_row(csv_out, {ref_name, name, csv::format_double(std::round(mos * 1e4) / 1e4)});
        }
    }
    csv_out.close();

    std::ofstream cfg(dir / "config.json", std::ios::binary | std::ios::trunc);
    cfg << "{\n"
           "  \"datasets\": [{\"name\": \"toy\", \"path\": \"images\", \"sample\": "
        << opt.images
        << "}],\n"
           "  \"rated_database\": {\"csv\": \"rated/ratings.csv\", \"higher_is_better\": true},\n"
           "  \"metrics\": [\"rmse\", \"ssim\"],\n"
           "  \"families\": [\"translation\", \"rotation\", \"scale\", \"illuminant\"],\n"
           "  \"geometry\": {\"pixels_per_degree\": 32},\n"
           "  \"reference_ellipses\": [{\"name\": \"toy-reference\", \"center\": [0.3333333333333333, "
           "0.3333333333333333], \"semi_major\": 0.03, \"semi_minor\": 0.015, \"angle\": 0.9}],\n"
           "  \"sensitivity\": {\"human_ellipse\": \"toy-reference\"},\n"
           "  \"output_dir\": \"out\",\n"
           "  \"seed\": 1\n"
           "}\n";
}

}  // namespace invt
