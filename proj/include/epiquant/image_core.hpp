#pragma once

#include "epiquant/types.hpp"

namespace epiquant {

// BT.601 luminance: gray = round(0.2989 R + 0.5870 G + 0.1140 B).
GrayImage to_gray(const RgbImage& img);

// Stretches intensities onto [0,255]; a constant image maps to all-zero.
// Rounding is half-away-from-zero (lround).
GrayImage min_max_stretch(const GrayImage& img);

// Per-channel variant of the stretch (each channel rescaled by its own range).
RgbImage min_max_stretch(const RgbImage& img);

// sRGB (8-bit, D65) <-> CIELAB. All math in doubles; out-of-gamut results are
// clamped on the return trip.
LabPixel rgb_to_lab(Rgb8 px);
Rgb8 lab_to_rgb(const LabPixel& px);
LabImage rgb_to_lab(const RgbImage& img);
RgbImage lab_to_rgb(const LabImage& img);

}  // namespace epiquant
