#pragma once

#include "epiquant/types.hpp"

namespace epiquant {

// Per-channel CIELAB mean/std; std floored so degenerate channels stay total.
struct LabStats {
    double mean_l = 0.0, mean_a = 0.0, mean_b = 0.0;
    double std_l = 1.0, std_a = 1.0, std_b = 1.0;
};

enum class NormalizationMethod { Reinhard, HistogramSpecification, Macenko, None };

// Population mean/std per Lab channel; std floored at eps.
LabStats lab_stats(const RgbImage& img, double eps = 1e-6);

// Lab-space mean/std transfer toward the target. No stretch step.
RgbImage reinhard_transfer(const RgbImage& src, const LabStats& target, double eps = 1e-6);

// Transfer followed by the per-RGB-channel min-max stretch.
RgbImage reinhard_normalize(const RgbImage& src, const LabStats& target, double eps = 1e-6);

// Per-RGB-channel cumulative histogram matching against the reference.
RgbImage histogram_specification(const RgbImage& src, const RgbImage& reference);

struct MacenkoParams {
    double od_cutoff = 0.15;      // transparency threshold on every OD channel
    double alpha_percentile = 1;  // robust angle percentile (1 -> [1%, 99%])
    double beta_percentile = 99;  // concentration scaling percentile
    int min_pixels = 10;
    // Reference maxima the per-stain concentrations are rescaled to, in the
    // convention of the original reference implementation.
    double ref_max_c1 = 1.9705;
    double ref_max_c2 = 1.0308;
};

// Stain vectors estimated from the OD point cloud (principal plane, extreme
// angle percentiles); concentrations rescaled to the reference maxima and the
// image reconstructed. Throws DegenerateInputError when too few pixels pass
// the OD cutoff.
RgbImage macenko_normalize(const RgbImage& src, const MacenkoParams& params = {});

// Estimated stain basis, exposed for validation.
struct MacenkoStains {
    double stain1[3];  // higher red-OD vector first (hematoxylin-like)
    double stain2[3];
};
MacenkoStains macenko_estimate_stains(const RgbImage& src, const MacenkoParams& params = {});

}  // namespace epiquant
