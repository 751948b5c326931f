#pragma once

#include <array>
#include <cstdint>

#include "epiquant/types.hpp"

namespace epiquant {

// Discrete disk structuring element: {(dx,dy) : dx^2 + dy^2 <= r^2}.
struct DiskSE {
    int radius = 15;
};

// Between-class-variance threshold over the 256-bin histogram. The darker
// class is {v <= t}; ties break toward the lower threshold; a constant image
// returns its single value.
int otsu_threshold(const std::array<std::uint64_t, 256>& histogram);
int otsu_threshold(const GrayImage& img);

// Set-theoretic morphology over Z^2 restricted to the canvas: pixels outside
// the canvas are background. The closing evaluates its intermediate dilation
// on an expanded domain so no structure is clipped at the border.
BinaryMask morph_erode(const BinaryMask& mask, DiskSE se);
BinaryMask morph_dilate(const BinaryMask& mask, DiskSE se);
BinaryMask morph_open(const BinaryMask& mask, DiskSE se);
BinaryMask morph_close(const BinaryMask& mask, DiskSE se);

// False regions not connected (default 4-connectivity) to the image border
// become true.
BinaryMask fill_holes(const BinaryMask& mask, int hole_connectivity = 4);

// Keeps the largest component (default 8-connectivity); ties go to the
// component whose first pixel comes first in row-major order.
// Throws EmptyMaskError.
BinaryMask largest_component(const BinaryMask& mask, int connectivity = 8);

struct TissueMaskOptions {
    int se_radius = 15;
    int component_connectivity = 8;  // 4 or 8; holes use the complement
};

// Otsu on the hematoxylin display (tissue = darker side), then
// open -> close -> fill -> largest component -> open -> close -> fill.
// A constant channel has no stain contrast and yields EmptyMaskError.
BinaryMask build_tissue_mask(const GrayImage& hema_display, const TissueMaskOptions& opt = {});

}  // namespace epiquant
