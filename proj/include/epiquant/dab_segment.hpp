#pragma once

#include <cstdint>
#include <vector>

#include "epiquant/types.hpp"

namespace epiquant {

// Per-pixel feature rows (tissue pixels only), z-scored per column.
struct FeatureSet {
    int n = 0;
    int d = 0;
    std::vector<double> values;       // n x d, row-major, standardized
    std::vector<int> pixel_index;     // linear index into the source image
    std::vector<double> col_mean;     // pre-standardization, per column
    std::vector<double> col_std;      // pre-standardization, before flooring

    double at(int row, int col) const { return values[std::size_t(row) * d + col]; }
};

struct Clustering {
    int k = 0;
    std::vector<int> labels;                      // per feature row, in [0,k)
    std::vector<double> centroids;                // k x d, row-major
    std::vector<double> mean_display_intensity;   // per cluster, ascending once ordered

    double centroid(int cluster, int col) const { return centroids[std::size_t(cluster) * d_ + col]; }
    int d_ = 0;
};

// Features are the three channels of the DAB-tinted rendering over tissue
// pixels. Throws EmptyMaskError.
FeatureSet extract_features(const RgbImage& dab_rgb, const BinaryMask& mask, double eps = 1e-6);

// k-means++ seeded Lloyd iterations; deterministic for a fixed seed. Empty
// clusters are re-seeded to the farthest point. Throws TooFewPointsError when
// k > n. sse_trace, when given, records the objective after each assignment.
Clustering kmeans(const FeatureSet& f, int k, std::uint64_t seed);
Clustering kmeans(const FeatureSet& f, int k, std::uint64_t seed, std::vector<double>* sse_trace);

// Davies-Bouldin index; throws UndefinedForKOneError when k < 2. Coincident
// centroids score +infinity.
double davies_bouldin(const FeatureSet& f, const Clustering& c);

struct SegmentConfig {
    std::uint64_t seed = 0;
    double uniformity_tau = 2.0;  // gray levels; below this the region is k=1
    double dark_tau = 192.0;      // k=1 regions darker than this are all DAB
    double eps = 1e-6;
};

// Picks k in {1,2,3}: k=1 for near-uniform regions, otherwise the smaller
// Davies-Bouldin of k=2 and k=3 (ties to the smaller k).
Clustering choose_k(const FeatureSet& f, const SegmentConfig& cfg);

// Reorders cluster ids so mean display intensity is non-decreasing
// (darkest = cluster 0) and fills mean_display_intensity.
void order_clusters_by_intensity(Clustering& c, const FeatureSet& f, const GrayImage& dab_gray);

struct SegmentResult {
    BinaryMask dab_mask;
    int k = 0;
    Clustering clustering;
};

// Full segmentation: features -> choose_k -> darkest cluster. For k=1 the
// DAB region is empty unless the whole region's mean display intensity is
// below dark_tau, in which case it is the full tissue region.
SegmentResult select_dab_region(const RgbImage& dab_rgb, const GrayImage& dab_gray,
                                const BinaryMask& mask, const SegmentConfig& cfg = {});

}  // namespace epiquant
