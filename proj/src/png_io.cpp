#include "invt/png_io.hpp"

#include "invt/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

namespace invt {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

std::uint8_t to_byte(float v) noexcept {
    return static_cast<std::uint8_t>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0));
}

// Rows of 8-bit samples for the encoder; linear input is re-encoded.
std::vector<std::uint8_t> to_bytes(const ImageBuffer& img) {
    const ImageBuffer& enc = img.linear() ? linear_to_srgb(img) : img;
    std::vector<std::uint8_t> bytes(enc.size());
    const auto s = enc.samples();
    std::transform(s.begin(), s.end(), bytes.begin(), to_byte);
    return bytes;
}

void write_png(const ImageBuffer& img, png_rw_ptr write_fn, void* io, std::FILE* file) {
    if (img.empty()) throw ArgumentError("cannot encode an empty image");
    std::vector<std::uint8_t> bytes = to_bytes(img);

    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                              png_warning_handler);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }
    std::vector<png_bytep> rows(img.height());
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encode failed: " + err);
    }
    if (file)
        png_init_io(png, file);
    else
        png_set_write_fn(png, io, write_fn, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()),
                 8, img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    const std::size_t stride = img.width() * img.channels();
    for (std::size_t y = 0; y < img.height(); ++y) rows[y] = bytes.data() + y * stride;
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

void append_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw DecodeError("cannot open image file: " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw DecodeError("not a PNG file: " + path.string());

    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler,
                                             png_warning_handler);
    if (!png) throw DecodeError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("png_create_info_struct failed");
    }

    // Everything that may longjmp lives below; only POD state crosses setjmp.
    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;
    volatile png_uint_32 width = 0, height = 0;
    volatile int depth = 0, out_channels = 0;
    volatile bool unsupported = false;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("PNG decode failed for " + path.string() + ": " + err);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
        depth = 8;
    } else if (depth != 8 && depth != 16) {
        unsupported = true;
    }
    if (!unsupported) {
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
            png_set_strip_alpha(png);
        if (depth == 16) png_set_swap(png);
        png_read_update_info(png, info);
        out_channels = png_get_channels(png, info);
        const std::size_t rowbytes = png_get_rowbytes(png, info);
        raw.resize(rowbytes * height);
        rows.resize(height);
        for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * rowbytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (unsupported)
        throw DecodeError("unsupported PNG bit depth " + std::to_string(depth) + " in " + path.string());
    if (out_channels != 1 && out_channels != 3)
        throw DecodeError("unexpected channel count " + std::to_string(out_channels) + " in " + path.string());

    const std::size_t n = static_cast<std::size_t>(width) * height * out_channels;
    std::vector<float> data(n);
    if (depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint16_t v;
            std::memcpy(&v, raw.data() + 2 * i, 2);
            data[i] = static_cast<float>(v / 65535.0);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<float>(raw[i] / 255.0);
    }
    return ImageBuffer(width, height, static_cast<std::size_t>(out_channels), std::move(data));
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw Error("cannot open for writing: " + path.string());
    write_png(img, nullptr, nullptr, file.get());
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    std::vector<std::uint8_t> out;
    write_png(img, append_to_vector, &out, nullptr);
    return out;
}

}  // namespace invt
