#pragma once

#include <vector>

#include "epiquant/types.hpp"

namespace epiquant {

enum class GateRegion { WholeImage, TissueOnly };

struct GateConfig {
    int pixel_threshold = 130;  // DAB display level; darker counts as stained
    double ap_threshold = 0.6;  // percent; keep when AP >= threshold
    GateRegion region = GateRegion::WholeImage;
};

// AP = 100 * |{pixels in region : intensity < pixel_threshold}| / |region|.
// Throws EmptyMaskError for TissueOnly with an empty mask.
double average_proportion(const GrayImage& dab_display, const GateConfig& cfg,
                          const BinaryMask& mask);
double average_proportion(const GrayImage& dab_display, const GateConfig& cfg);

// Inclusive at the boundary: keep iff ap >= ap_threshold.
bool gate(double ap, const GateConfig& cfg);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct CalibrationResult {
    double ap_threshold = 0.0;  // Youden-optimal threshold
    double auc = 0.0;
    double youden_j = 0.0;
    std::vector<RocPoint> roc_points;  // one per grid threshold, ascending
};

struct CalibrationRange {
    double lo = 0.10;
    double hi = 1.00;
    double step = 0.01;
};

// Scans the threshold grid, maximizing Youden J = TPR - FPR (ties to the
// smallest threshold). AUC by trapezoid over the ROC anchored at (0,0) and
// (1,1). Throws EmptyInputError when either list is empty.
CalibrationResult calibrate(const std::vector<double>& positive_aps,
                            const std::vector<double>& negative_aps,
                            const CalibrationRange& range = {});

}  // namespace epiquant
