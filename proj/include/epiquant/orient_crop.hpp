#pragma once

#include <vector>

#include "epiquant/types.hpp"

namespace epiquant {

struct RotationResult {
    double angle_deg = 0.0;          // on the search grid, [0, 180)
    int profile_peak = 0;            // max(profile)
    std::vector<int> profile;        // row sums of the mask rotated by angle_deg
};

struct RotationOptions {
    double step_deg = 0.1;
    int downsample_cap = 512;        // coarse pass runs with max(side) <= cap
    double refine_window_deg = 1.0;  // full-resolution refinement half-width
};

// Rotation about the image center with canvas expansion; nearest-neighbor
// for masks (background false), bilinear for images (background fill).
BinaryMask rotate_mask(const BinaryMask& mask, double angle_deg);
RgbImage rotate_image(const RgbImage& img, double angle_deg, Rgb8 fill = {255, 255, 255});
GrayImage rotate_image(const GrayImage& img, double angle_deg, std::uint8_t fill = 255);

// Per-row true-pixel counts.
std::vector<int> row_sum_profile(const BinaryMask& mask);

// Equals row_sum_profile(rotate_mask(mask, angle_deg)) without materializing
// the rotated mask.
std::vector<int> rotated_row_profile(const BinaryMask& mask, double angle_deg);

// Coarse-to-fine search over the angle grid {0, step, ...} < 180 for the
// angle whose rotated row profile has the highest peak; ties break to the
// smallest angle. Throws EmptyMaskError.
RotationResult find_rotation(const BinaryMask& mask, const RotationOptions& opt = {});

// Full-resolution scan of every grid angle; the reference the coarse-to-fine
// search is measured against.
RotationResult find_rotation_exhaustive(const BinaryMask& mask, double step_deg = 0.1);

// Rotation plus mask-bounding-box crop (expanded by margin, clamped to the
// canvas), applied identically to every layer so they stay registered.
struct OrientPlan {
    double angle_deg = 0.0;
    int rot_width = 0;
    int rot_height = 0;
    int crop_x = 0;
    int crop_y = 0;
    int crop_width = 0;
    int crop_height = 0;
    BinaryMask rotated_mask;  // already rotated, pre-crop
};

OrientPlan plan_orientation(const BinaryMask& mask, double angle_deg, int margin);
RgbImage apply_plan(const OrientPlan& plan, const RgbImage& img, Rgb8 fill = {255, 255, 255});
GrayImage apply_plan(const OrientPlan& plan, const GrayImage& img, std::uint8_t fill = 255);
BinaryMask apply_plan_mask(const OrientPlan& plan);

std::pair<RgbImage, BinaryMask> apply_orientation(const RgbImage& img, const BinaryMask& mask,
                                                  const RotationResult& r, int margin);
std::pair<GrayImage, BinaryMask> apply_orientation(const GrayImage& img, const BinaryMask& mask,
                                                   const RotationResult& r, int margin);

}  // namespace epiquant
