#include "epiquant/stain_deconvolve.hpp"

#include <algorithm>
#include <cmath>

#include "epiquant/errors.hpp"

namespace epiquant {

namespace {

inline std::uint8_t display_level(double c) {
    return static_cast<std::uint8_t>(
        std::clamp(std::lround(255.0 * std::pow(10.0, -std::max(c, 0.0))), 0L, 255L));
}

std::array<double, 3> unit(const std::array<double, 3>& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n < 1e-12) throw DegenerateInputError("zero-length stain vector");
    return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

double StainMatrix::det() const {
    const auto& m = rows;
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

StainMatrix StainMatrix::from_rows(const std::array<double, 3>& hema,
                                   const std::array<double, 3>& dab,
                                   const std::array<double, 3>& residual) {
    StainMatrix m;
    const std::array<std::array<double, 3>, 3> rows = {unit(hema), unit(dab), unit(residual)};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m.rows[i][j] = rows[i][j];
    return m;
}

StainMatrix StainMatrix::from_two_stains(const std::array<double, 3>& hema,
                                         const std::array<double, 3>& dab) {
    const auto h = unit(hema);
    const auto d = unit(dab);
    const std::array<double, 3> cross = {h[1] * d[2] - h[2] * d[1], h[2] * d[0] - h[0] * d[2],
                                         h[0] * d[1] - h[1] * d[0]};
    return from_rows(h, d, cross);
}

StainMatrix hdab_stain_matrix() {
    return StainMatrix::from_two_stains({0.650, 0.704, 0.286}, {0.269, 0.570, 0.776});
}

OdImage od_from_rgb(const RgbImage& img) {
    OdImage out(img.width, img.height);
    // I = 0 clamps to I = 1 so the transform stays total.
    double lut[256];
    lut[0] = -std::log10(1.0 / 255.0);
    for (int v = 1; v < 256; ++v) lut[v] = -std::log10(v / 255.0);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const Rgb8& p = img.data[i];
        out.data[i] = {lut[p.r], lut[p.g], lut[p.b]};
    }
    return out;
}

StainChannels deconvolve(const OdImage& od, const StainMatrix& m) {
    const double det = m.det();
    if (std::abs(det) <= 1e-6) throw SingularMatrixError("stain matrix is singular");

    // c = (M^T)^-1 od; inverse of M^T by adjugate. (M^T)^-1 = adj(M^T)/det,
    // and adj(M^T) = adj(M)^T, so inv[i][j] = cof(M)[i][j]/det.
    const auto& r = m.rows;
    double inv[3][3];
    inv[0][0] = (r[1][1] * r[2][2] - r[1][2] * r[2][1]) / det;
    inv[0][1] = -(r[1][0] * r[2][2] - r[1][2] * r[2][0]) / det;
    inv[0][2] = (r[1][0] * r[2][1] - r[1][1] * r[2][0]) / det;
    inv[1][0] = -(r[0][1] * r[2][2] - r[0][2] * r[2][1]) / det;
    inv[1][1] = (r[0][0] * r[2][2] - r[0][2] * r[2][0]) / det;
    inv[1][2] = -(r[0][0] * r[2][1] - r[0][1] * r[2][0]) / det;
    inv[2][0] = (r[0][1] * r[1][2] - r[0][2] * r[1][1]) / det;
    inv[2][1] = -(r[0][0] * r[1][2] - r[0][2] * r[1][0]) / det;
    inv[2][2] = (r[0][0] * r[1][1] - r[0][1] * r[1][0]) / det;

    StainChannels ch;
    ch.width = od.width;
    ch.height = od.height;
    ch.matrix = m;
    const std::size_t n = od.data.size();
    ch.c_hema.resize(n);
    ch.c_dab.resize(n);
    ch.c_res.resize(n);
    ch.hema_display = GrayImage(od.width, od.height);
    ch.dab_display = GrayImage(od.width, od.height);
    ch.res_display = GrayImage(od.width, od.height);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = od.data[i];
        const double c0 = inv[0][0] * v[0] + inv[0][1] * v[1] + inv[0][2] * v[2];
        const double c1 = inv[1][0] * v[0] + inv[1][1] * v[1] + inv[1][2] * v[2];
        const double c2 = inv[2][0] * v[0] + inv[2][1] * v[1] + inv[2][2] * v[2];
        ch.c_hema[i] = c0;
        ch.c_dab[i] = c1;
        ch.c_res[i] = c2;
        ch.hema_display.data[i] = display_level(c0);
        ch.dab_display.data[i] = display_level(c1);
        ch.res_display.data[i] = display_level(c2);
    }
    return ch;
}

RgbImage dab_display_rgb(const StainChannels& ch) {
    RgbImage out(ch.width, ch.height);
    const double* dab = ch.matrix.rows[1];
    // 10^(-c*m_k) per channel via pow; c clamped at 0 for display only.
    for (std::size_t i = 0; i < ch.c_dab.size(); ++i) {
        const double c = std::max(ch.c_dab[i], 0.0);
        Rgb8 p;
        p.r = static_cast<std::uint8_t>(
            std::clamp(std::lround(255.0 * std::pow(10.0, -c * dab[0])), 0L, 255L));
        p.g = static_cast<std::uint8_t>(
            std::clamp(std::lround(255.0 * std::pow(10.0, -c * dab[1])), 0L, 255L));
        p.b = static_cast<std::uint8_t>(
            std::clamp(std::lround(255.0 * std::pow(10.0, -c * dab[2])), 0L, 255L));
        out.data[i] = p;
    }
    return out;
}

}  // namespace epiquant
