#include "epiquant/dab_gate.hpp"

#include <algorithm>
#include <cmath>

#include "epiquant/errors.hpp"

namespace epiquant {

double average_proportion(const GrayImage& dab_display, const GateConfig& cfg,
                          const BinaryMask& mask) {
    if (cfg.region == GateRegion::WholeImage) return average_proportion(dab_display, cfg);
    std::size_t region = 0, stained = 0;
    for (std::size_t i = 0; i < dab_display.data.size(); ++i) {
        if (!mask.data[i]) continue;
        ++region;
        stained += (dab_display.data[i] < cfg.pixel_threshold);
    }
    if (region == 0) throw EmptyMaskError("average_proportion: empty tissue region");
    return 100.0 * double(stained) / double(region);
}

double average_proportion(const GrayImage& dab_display, const GateConfig& cfg) {
    std::size_t stained = 0;
    for (auto v : dab_display.data) stained += (v < cfg.pixel_threshold);
    return 100.0 * double(stained) / double(dab_display.data.size());
}

bool gate(double ap, const GateConfig& cfg) { return ap >= cfg.ap_threshold; }

CalibrationResult calibrate(const std::vector<double>& positive_aps,
                            const std::vector<double>& negative_aps,
                            const CalibrationRange& range) {
    if (positive_aps.empty() || negative_aps.empty())
        throw EmptyInputError("calibrate: need at least one AP value per class");

    const int n = (int)std::lround((range.hi - range.lo) / range.step) + 1;
    CalibrationResult res;
    res.roc_points.reserve(n);
    double best_j = -2.0;
    for (int i = 0; i < n; ++i) {
        const double t = range.lo + i * range.step;
        const auto frac_ge = [t](const std::vector<double>& v) {
            std::size_t c = 0;
            for (double a : v) c += (a >= t);
            return double(c) / double(v.size());
        };
        const double tpr = frac_ge(positive_aps);
        const double fpr = frac_ge(negative_aps);
        res.roc_points.push_back({fpr, tpr, t});
        const double j = tpr - fpr;
        if (j > best_j) {  // strict: ties keep the smallest threshold
            best_j = j;
            res.ap_threshold = t;
        }
    }
    res.youden_j = best_j;

    // Trapezoid AUC over points sorted by FPR, anchored at the corners.
    std::vector<std::pair<double, double>> pts;
    pts.reserve(res.roc_points.size() + 2);
    pts.emplace_back(0.0, 0.0);
    for (const RocPoint& p : res.roc_points) pts.emplace_back(p.fpr, p.tpr);
    pts.emplace_back(1.0, 1.0);
    std::sort(pts.begin(), pts.end());
    double auc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        auc += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
    res.auc = auc;
    return res;
}

}  // namespace epiquant
