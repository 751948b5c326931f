#include "epiquant/quantify_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "epiquant/errors.hpp"

namespace epiquant {

double dab_percentage(const BinaryMask& dab_mask, const BinaryMask& tissue_mask) {
    if (dab_mask.width != tissue_mask.width || dab_mask.height != tissue_mask.height)
        throw Error("dab_percentage: mask dimensions differ");
    std::size_t tissue = 0, dab = 0;
    for (std::size_t i = 0; i < tissue_mask.data.size(); ++i) {
        if (dab_mask.data[i] && !tissue_mask.data[i])
            throw SubsetViolationError("dab_percentage: DAB pixel outside tissue");
        tissue += (tissue_mask.data[i] != 0);
        dab += (dab_mask.data[i] != 0);
    }
    if (tissue == 0) throw EmptyMaskError("dab_percentage: empty tissue mask");
    return 100.0 * double(dab) / double(tissue);
}

RgbImage render_overlay(const RgbImage& original, const BinaryMask& dab_mask,
                        const OverlayStyle& style) {
    const int w = dab_mask.width, h = dab_mask.height;
    std::vector<std::uint8_t> contour(std::size_t(w) * h, 0);
    auto outside_or_false = [&](int x, int y) {
        return x < 0 || y < 0 || x >= w || y >= h || !dab_mask.get(x, y);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (dab_mask.get(x, y) &&
                (outside_or_false(x - 1, y) || outside_or_false(x + 1, y) ||
                 outside_or_false(x, y - 1) || outside_or_false(x, y + 1)))
                contour[std::size_t(y) * w + x] = 1;

    if (style.thicken) {
        std::vector<std::uint8_t> thick = contour;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!contour[std::size_t(y) * w + x]) continue;
                const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& n : nb)
                    if (n[0] >= 0 && n[1] >= 0 && n[0] < w && n[1] < h)
                        thick[std::size_t(n[1]) * w + n[0]] = 1;
            }
        contour.swap(thick);
    }

    RgbImage out = original;
    for (std::size_t i = 0; i < contour.size(); ++i)
        if (contour[i]) out.data[i] = style.color;
    return out;
}

namespace {

double interp_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * (sorted.size() - 1);
    const std::size_t lo = (std::size_t)pos;
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - lo;
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<MarkerSummary> aggregate(const std::vector<QuantRecord>& records) {
    std::map<std::string, std::vector<double>> values;
    std::map<std::string, int> gated;
    for (const QuantRecord& r : records) {
        if (r.failed) continue;
        gated.try_emplace(r.marker, 0);
        if (r.gated_out) {
            ++gated[r.marker];
        } else if (r.dab_percent) {
            values[r.marker].push_back(*r.dab_percent);
        }
    }
    std::vector<MarkerSummary> out;
    for (auto& [marker, g] : gated) {
        MarkerSummary s;
        s.marker = marker;
        s.gated_out_count = g;
        auto it = values.find(marker);
        if (it != values.end()) {
            std::vector<double>& v = it->second;
            std::sort(v.begin(), v.end());
            s.count = (int)v.size();
            s.median = interp_quantile(v, 0.5);
            s.q1 = interp_quantile(v, 0.25);
            s.q3 = interp_quantile(v, 0.75);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string report_csv(const std::vector<QuantRecord>& records) {
    std::string out = "image_id,marker,ap_percent,gated_out,k,dab_percent,rotation_deg,overlay_path\n";
    for (const QuantRecord& r : records) {
        out += csv_escape(r.image_id);
        out += ',';
        out += csv_escape(r.marker);
        if (r.failed) {
            // Failure rows keep only the identity columns.
            out += ",,,,,,\n";
            continue;
        }
        out += ',';
        out += format_number(r.ap);
        out += ',';
        out += r.gated_out ? "true" : "false";
        out += ',';
        if (r.k) out += std::to_string(*r.k);
        out += ',';
        if (r.dab_percent) out += format_number(*r.dab_percent);
        out += ',';
        out += format_number(r.rotation_deg);
        out += ',';
        out += csv_escape(r.overlay_path);
        out += '\n';
    }
    return out;
}

std::string summary_csv(const std::vector<MarkerSummary>& summaries) {
    std::string out = "marker,count,gated_out_count,median,q1,q3\n";
    for (const MarkerSummary& s : summaries) {
        out += csv_escape(s.marker);
        out += ',';
        out += std::to_string(s.count);
        out += ',';
        out += std::to_string(s.gated_out_count);
        out += ',';
        out += format_number(s.median);
        out += ',';
        out += format_number(s.q1);
        out += ',';
        out += format_number(s.q3);
        out += '\n';
    }
    return out;
}

}  // namespace epiquant
