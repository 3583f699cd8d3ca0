#include "invt/color.hpp"

#include <Eigen/Dense>

namespace invt {

namespace {

struct Matrices {
    Mat3 to_xyz;
    Mat3 to_rgb;
};

Matrices build() {
    // sRGB / Rec.709 primaries.
    const double px[3] = {0.64, 0.30, 0.15};
    const double py[3] = {0.33, 0.60, 0.06};
    Eigen::Matrix3d primaries;
    for (int i = 0; i < 3; ++i) {
        primaries(0, i) = px[i] / py[i];
        primaries(1, i) = 1.0;
        primaries(2, i) = (1.0 - px[i] - py[i]) / py[i];
    }
    // Scale each primary so that R=G=B=1 maps to XYZ of E with Y=1, i.e. (1,1,1).
    const Eigen::Vector3d s = primaries.partialPivLu().solve(Eigen::Vector3d::Ones());
    const Eigen::Matrix3d m = primaries * s.asDiagonal();
    const Eigen::Matrix3d inv = m.inverse();
    Matrices out{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            out.to_xyz[r][c] = m(r, c);
            out.to_rgb[r][c] = inv(r, c);
        }
    return out;
}

const Matrices& matrices() {
    static const Matrices m = build();
    return m;
}

}  // namespace

const Mat3& rgb_to_xyz_matrix() { return matrices().to_xyz; }
const Mat3& xyz_to_rgb_matrix() { return matrices().to_rgb; }

Vec3 mul(const Mat3& m, const Vec3& v) noexcept {
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return r;
}

double luminance(const Vec3& rgb) noexcept {
    const auto& m = rgb_to_xyz_matrix();
    return m[1][0] * rgb[0] + m[1][1] * rgb[1] + m[1][2] * rgb[2];
}

Chromaticity rgb_chromaticity(const Vec3& rgb) noexcept {
    const Vec3 xyz = mul(rgb_to_xyz_matrix(), rgb);
    const double sum = xyz[0] + xyz[1] + xyz[2];
    return {xyz[0] / sum, xyz[1] / sum};
}

Vec3 rgb_from_chromaticity(const Chromaticity& c) noexcept {
    const Vec3 xyz{c.x / c.y, 1.0, (1.0 - c.x - c.y) / c.y};
    return mul(xyz_to_rgb_matrix(), xyz);
}

}  // namespace invt
