#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epiquant/types.hpp"

namespace epiquant {

// 100 * |dab_mask| / |tissue_mask|. Throws EmptyMaskError on an empty tissue
// mask and SubsetViolationError when DAB pixels fall outside tissue.
double dab_percentage(const BinaryMask& dab_mask, const BinaryMask& tissue_mask);

struct OverlayStyle {
    Rgb8 color = {0, 255, 0};
    bool thicken = true;  // one dilation step on the contour
};

// Draws the mask boundary (mask pixels with a non-mask 4-neighbor; the canvas
// border counts as non-mask) onto a copy of the image.
RgbImage render_overlay(const RgbImage& original, const BinaryMask& dab_mask,
                        const OverlayStyle& style = {});

struct QuantRecord {
    std::string image_id;
    std::string marker;
    double ap = 0.0;
    bool gated_out = false;
    std::optional<int> k;
    std::optional<double> dab_percent;
    double rotation_deg = 0.0;
    std::string overlay_path;
    std::string mask_path;
    bool failed = false;
    std::string error;  // diagnostic only; not part of the CSV row
};

struct MarkerSummary {
    std::string marker;
    int count = 0;            // records quantified (not gated out, not failed)
    int gated_out_count = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

// Groups by marker (sorted); median is the midpoint of the two central order
// statistics, quartiles by linear interpolation at 0.25/0.75 of (n-1).
std::vector<MarkerSummary> aggregate(const std::vector<QuantRecord>& records);

// RFC-4180, UTF-8, LF endings, one row per record in input order.
// Header: image_id,marker,ap_percent,gated_out,k,dab_percent,rotation_deg,overlay_path
std::string report_csv(const std::vector<QuantRecord>& records);

// Header: marker,count,gated_out_count,median,q1,q3
std::string summary_csv(const std::vector<MarkerSummary>& summaries);

std::string csv_escape(const std::string& field);
std::string format_number(double v);

}  // namespace epiquant
