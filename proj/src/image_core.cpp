#include "epiquant/image_core.hpp"

#include <algorithm>
#include <cmath>

namespace epiquant {

namespace {

inline std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// sRGB <-> XYZ (D65) matrices and CIE constants.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kXyzToRgb[3][3] = {
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
};
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.00000;
constexpr double kWhiteZ = 1.08883;
constexpr double kLabEps = 216.0 / 24389.0;
constexpr double kLabKappa = 24389.0 / 27.0;

inline double srgb_to_linear(double v) {
    return (v <= 0.04045) ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double v) {
    return (v <= 0.0031308) ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline double lab_f(double t) {
    return (t > kLabEps) ? std::cbrt(t) : (kLabKappa * t + 16.0) / 116.0;
}

inline double lab_f_inv(double t) {
    double t3 = t * t * t;
    return (t3 > kLabEps) ? t3 : (116.0 * t - 16.0) / kLabKappa;
}

}  // namespace

GrayImage to_gray(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const Rgb8& p = img.data[i];
        out.data[i] = clamp_u8(0.2989 * p.r + 0.5870 * p.g + 0.1140 * p.b);
    }
    return out;
}

GrayImage min_max_stretch(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    auto [mn_it, mx_it] = std::minmax_element(img.data.begin(), img.data.end());
    const int mn = *mn_it, mx = *mx_it;
    if (mn == mx) return out;  // all-zero by convention
    const double scale = 255.0 / (mx - mn);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = clamp_u8((img.data[i] - mn) * scale);
    return out;
}

RgbImage min_max_stretch(const RgbImage& img) {
    RgbImage out(img.width, img.height);
    int mn[3] = {255, 255, 255};
    int mx[3] = {0, 0, 0};
    for (const Rgb8& p : img.data) {
        const int ch[3] = {p.r, p.g, p.b};
        for (int c = 0; c < 3; ++c) {
            mn[c] = std::min(mn[c], ch[c]);
            mx[c] = std::max(mx[c], ch[c]);
        }
    }
    double scale[3];
    for (int c = 0; c < 3; ++c) scale[c] = (mn[c] == mx[c]) ? 0.0 : 255.0 / (mx[c] - mn[c]);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const Rgb8& p = img.data[i];
        out.data[i] = {clamp_u8((p.r - mn[0]) * scale[0]), clamp_u8((p.g - mn[1]) * scale[1]),
                       clamp_u8((p.b - mn[2]) * scale[2])};
    }
    return out;
}

LabPixel rgb_to_lab(Rgb8 px) {
    const double rl = srgb_to_linear(px.r / 255.0);
    const double gl = srgb_to_linear(px.g / 255.0);
    const double bl = srgb_to_linear(px.b / 255.0);
    const double x = kRgbToXyz[0][0] * rl + kRgbToXyz[0][1] * gl + kRgbToXyz[0][2] * bl;
    const double y = kRgbToXyz[1][0] * rl + kRgbToXyz[1][1] * gl + kRgbToXyz[1][2] * bl;
    const double z = kRgbToXyz[2][0] * rl + kRgbToXyz[2][1] * gl + kRgbToXyz[2][2] * bl;
    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb8 lab_to_rgb(const LabPixel& px) {
    const double fy = (px.l + 16.0) / 116.0;
    const double fx = fy + px.a / 500.0;
    const double fz = fy - px.b / 200.0;
    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * ((px.l > kLabEps * kLabKappa) ? fy * fy * fy
                                                            : px.l / kLabKappa);
    const double z = kWhiteZ * lab_f_inv(fz);
    const double rl = kXyzToRgb[0][0] * x + kXyzToRgb[0][1] * y + kXyzToRgb[0][2] * z;
    const double gl = kXyzToRgb[1][0] * x + kXyzToRgb[1][1] * y + kXyzToRgb[1][2] * z;
    const double bl = kXyzToRgb[2][0] * x + kXyzToRgb[2][1] * y + kXyzToRgb[2][2] * z;
    return {clamp_u8(linear_to_srgb(std::clamp(rl, 0.0, 1.0)) * 255.0),
            clamp_u8(linear_to_srgb(std::clamp(gl, 0.0, 1.0)) * 255.0),
            clamp_u8(linear_to_srgb(std::clamp(bl, 0.0, 1.0)) * 255.0)};
}

LabImage rgb_to_lab(const RgbImage& img) {
    LabImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = rgb_to_lab(img.data[i]);
    return out;
}

RgbImage lab_to_rgb(const LabImage& img) {
    RgbImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = lab_to_rgb(img.data[i]);
    return out;
}

}  // namespace epiquant
