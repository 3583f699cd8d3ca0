#include "invt/error.hpp"
#include "invt/png_io.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <doctest.h>
#include <png.h>

using namespace invt;

namespace {

// Writes raw rows with libpng so decoding is tested against bytes we control.
void write_raw_png(const std::filesystem::path& path, int w, int h, int bit_depth, int color_type,
                   const std::vector<std::vector<unsigned char>>& rows) {
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, f);
    png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& r : rows) png_write_row(png, r.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

}  // namespace

TEST_CASE("8-bit gray values scale to [0,1]") {
    const auto dir = testutil::tmp_dir("png8");
    write_raw_png(dir / "g.png", 3, 1, 8, PNG_COLOR_TYPE_GRAY, {{255, 0, 128}});
    const auto img = load_image(dir / "g.png");
    CHECK(img.channels() == 1);
    CHECK(img.at(0, 0) == 1.0f);
    CHECK(img.at(1, 0) == 0.0f);
    CHECK(img.at(2, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-7));
}

TEST_CASE("16-bit RGB decodes big-endian samples") {
    const auto dir = testutil::tmp_dir("png16");
    // (65535, 0, 32768) in network byte order.
    write_raw_png(dir / "c.png", 1, 1, 16, PNG_COLOR_TYPE_RGB, {{0xff, 0xff, 0x00, 0x00, 0x80, 0x00}});
    const auto img = load_image(dir / "c.png");
    CHECK(img.channels() == 3);
    CHECK(img.at(0, 0, 0) == 1.0f);
    CHECK(img.at(0, 0, 1) == 0.0f);
    CHECK(img.at(0, 0, 2) == doctest::Approx(32768.0 / 65535.0).epsilon(1e-7));
}

TEST_CASE("alpha is dropped") {
    const auto dir = testutil::tmp_dir("pngalpha");
    write_raw_png(dir / "a.png", 1, 1, 8, PNG_COLOR_TYPE_RGBA, {{10, 20, 30, 40}});
    const auto img = load_image(dir / "a.png");
    CHECK(img.channels() == 3);
    CHECK(img.at(0, 0, 2) == doctest::Approx(30.0 / 255.0));
}

TEST_CASE("unsupported bit depth and unreadable files raise decode errors") {
    const auto dir = testutil::tmp_dir("pngbad");
    write_raw_png(dir / "g4.png", 2, 1, 4, PNG_COLOR_TYPE_GRAY, {{0xf0}});
    CHECK_THROWS_AS(load_image(dir / "g4.png"), DecodeError);
    CHECK_THROWS_AS(load_image(dir / "missing.png"), DecodeError);
    {
        FILE* f = std::fopen((dir / "junk.png").c_str(), "wb");
        std::fputs("not a png", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_image(dir / "junk.png"), DecodeError);
}

TEST_CASE("save and load round-trip at 8 bits") {
    const auto dir = testutil::tmp_dir("pngrt");
    const auto img = quantize8(testutil::random_image(7, 5, 3, 11));
    save_image(img, dir / "sub" / "x.png");
    const auto back = load_image(dir / "sub" / "x.png");
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.samples()[i] == doctest::Approx(img.samples()[i]).epsilon(1e-7));
}
