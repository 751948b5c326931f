#include "epiquant/orient_crop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include "epiquant/errors.hpp"

namespace epiquant {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Inverse mapping for a rotation about the canvas center with expansion:
// source = R(theta) * (dest - dest_center) + source_center.
struct RotGeom {
    double c, s;
    double scx, scy, dcx, dcy;
    int dst_w, dst_h;
};

RotGeom make_geom(int w, int h, double angle_deg) {
    const double t = angle_deg * kPi / 180.0;
    RotGeom g;
    g.c = std::cos(t);
    g.s = std::sin(t);
    // The 1e-7 guard absorbs trig dust at exact quarter turns.
    g.dst_w = std::max(1, (int)std::ceil(w * std::abs(g.c) + h * std::abs(g.s) - 1e-7));
    g.dst_h = std::max(1, (int)std::ceil(w * std::abs(g.s) + h * std::abs(g.c) - 1e-7));
    g.scx = (w - 1) / 2.0;
    g.scy = (h - 1) / 2.0;
    g.dcx = (g.dst_w - 1) / 2.0;
    g.dcy = (g.dst_h - 1) / 2.0;
    return g;
}

inline int nearest(double v) { return (int)std::floor(v + 0.5); }

struct Bbox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    bool empty() const { return x1 < x0; }
};

Bbox mask_bbox(const BinaryMask& m) {
    Bbox b{m.width, m.height, -1, -1};
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.get(x, y)) {
                b.x0 = std::min(b.x0, x);
                b.y0 = std::min(b.y0, y);
                b.x1 = std::max(b.x1, x);
                b.y1 = std::max(b.y1, y);
            }
    return b;
}

// Interval of u satisfying lo <= coef*u + base < hi, widened to be safe
// against division roundoff. Returns false when empty.
bool solve_band(double coef, double base, double lo, double hi, double& ulo, double& uhi) {
    if (std::abs(coef) < 1e-12) {
        if (base >= lo && base < hi) {
            ulo = -std::numeric_limits<double>::infinity();
            uhi = std::numeric_limits<double>::infinity();
            return true;
        }
        return false;
    }
    double a = (lo - base) / coef;
    double b = (hi - base) / coef;
    if (a > b) std::swap(a, b);
    ulo = a - 1.0;
    uhi = b + 1.0;
    return true;
}

// Peak of the rotated row profile; identical per-pixel arithmetic to
// rotate_mask, with each destination row clipped to the source bounding box.
int rotated_peak(const BinaryMask& mask, const Bbox& bb, double angle_deg,
                 std::vector<int>* profile_out = nullptr) {
    const RotGeom g = make_geom(mask.width, mask.height, angle_deg);
    if (profile_out) profile_out->assign(g.dst_h, 0);
    if (bb.empty()) return 0;
    int peak = 0;
    for (int yd = 0; yd < g.dst_h; ++yd) {
        const double v = yd - g.dcy;
        const double base_x = -g.s * v + g.scx;  // sx = c*u + base_x
        const double base_y = g.c * v + g.scy;   // sy = s*u + base_y
        double ux0, ux1, uy0, uy1;
        if (!solve_band(g.c, base_x, bb.x0 - 0.5, bb.x1 + 0.5, ux0, ux1)) continue;
        if (!solve_band(g.s, base_y, bb.y0 - 0.5, bb.y1 + 0.5, uy0, uy1)) continue;
        const double ulo = std::max(ux0, uy0);
        const double uhi = std::min(ux1, uy1);
        if (ulo > uhi) continue;
        int xd_lo = std::max(0, (int)std::floor(ulo + g.dcx));
        int xd_hi = std::min(g.dst_w - 1, (int)std::ceil(uhi + g.dcx));
        int count = 0;
        for (int xd = xd_lo; xd <= xd_hi; ++xd) {
            const double u = xd - g.dcx;
            const int ix = nearest(g.c * u + base_x);
            const int iy = nearest(g.s * u + base_y);
            if (ix >= 0 && iy >= 0 && ix < mask.width && iy < mask.height && mask.get(ix, iy))
                ++count;
        }
        if (profile_out) (*profile_out)[yd] = count;
        peak = std::max(peak, count);
    }
    return peak;
}

BinaryMask downsample(const BinaryMask& mask, int factor) {
    const int w = (mask.width + factor - 1) / factor;
    const int h = (mask.height + factor - 1) / factor;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.set(x, y, mask.get(x * factor, y * factor));
    return out;
}

struct ScanBest {
    int index = -1;
    int peak = -1;
};

// Ascending scan with strict improvement keeps the smallest angle on ties.
template <typename Indices>
ScanBest scan_angles(const BinaryMask& mask, const Bbox& bb, double step_deg,
                     const Indices& indices) {
    ScanBest best;
    for (int i : indices) {
        const int peak = rotated_peak(mask, bb, i * step_deg);
        if (peak > best.peak) {
            best.peak = peak;
            best.index = i;
        }
    }
    return best;
}

}  // namespace

BinaryMask rotate_mask(const BinaryMask& mask, double angle_deg) {
    const RotGeom g = make_geom(mask.width, mask.height, angle_deg);
    BinaryMask out(g.dst_w, g.dst_h);
    for (int yd = 0; yd < g.dst_h; ++yd) {
        const double v = yd - g.dcy;
        const double base_x = -g.s * v + g.scx;
        const double base_y = g.c * v + g.scy;
        for (int xd = 0; xd < g.dst_w; ++xd) {
            const double u = xd - g.dcx;
            const int ix = nearest(g.c * u + base_x);
            const int iy = nearest(g.s * u + base_y);
            if (ix >= 0 && iy >= 0 && ix < mask.width && iy < mask.height && mask.get(ix, iy))
                out.set(xd, yd, true);
        }
    }
    return out;
}

namespace {

template <typename Img, typename Px>
Img rotate_bilinear(const Img& img, double angle_deg, Px fill) {
    const RotGeom g = make_geom(img.width, img.height, angle_deg);
    Img out(g.dst_w, g.dst_h, fill);
    auto sample = [&](int x, int y, int ch) -> double {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) {
            if constexpr (std::is_same_v<Px, Rgb8>) {
                return ch == 0 ? fill.r : (ch == 1 ? fill.g : fill.b);
            } else {
                return fill;
            }
        }
        if constexpr (std::is_same_v<Px, Rgb8>) {
            const Rgb8& p = img.at(x, y);
            return ch == 0 ? p.r : (ch == 1 ? p.g : p.b);
        } else {
            return img.at(x, y);
        }
    };
    const int channels = std::is_same_v<Px, Rgb8> ? 3 : 1;
    for (int yd = 0; yd < g.dst_h; ++yd) {
        const double v = yd - g.dcy;
        const double base_x = -g.s * v + g.scx;
        const double base_y = g.c * v + g.scy;
        for (int xd = 0; xd < g.dst_w; ++xd) {
            const double u = xd - g.dcx;
            const double sx = g.c * u + base_x;
            const double sy = g.s * u + base_y;
            const int x0 = (int)std::floor(sx);
            const int y0 = (int)std::floor(sy);
            const double fx = sx - x0;
            const double fy = sy - y0;
            double val[3];
            for (int ch = 0; ch < channels; ++ch) {
                const double top = sample(x0, y0, ch) * (1 - fx) + sample(x0 + 1, y0, ch) * fx;
                const double bot =
                    sample(x0, y0 + 1, ch) * (1 - fx) + sample(x0 + 1, y0 + 1, ch) * fx;
                val[ch] = top * (1 - fy) + bot * fy;
            }
            if constexpr (std::is_same_v<Px, Rgb8>) {
                out.at(xd, yd) = {(std::uint8_t)std::clamp(std::lround(val[0]), 0L, 255L),
                                  (std::uint8_t)std::clamp(std::lround(val[1]), 0L, 255L),
                                  (std::uint8_t)std::clamp(std::lround(val[2]), 0L, 255L)};
            } else {
                out.at(xd, yd) = (std::uint8_t)std::clamp(std::lround(val[0]), 0L, 255L);
            }
        }
    }
    return out;
}

}  // namespace

RgbImage rotate_image(const RgbImage& img, double angle_deg, Rgb8 fill) {
    return rotate_bilinear<RgbImage, Rgb8>(img, angle_deg, fill);
}

GrayImage rotate_image(const GrayImage& img, double angle_deg, std::uint8_t fill) {
    return rotate_bilinear<GrayImage, std::uint8_t>(img, angle_deg, fill);
}

std::vector<int> row_sum_profile(const BinaryMask& mask) {
    std::vector<int> profile(mask.height, 0);
    for (int y = 0; y < mask.height; ++y) {
        int count = 0;
        for (int x = 0; x < mask.width; ++x) count += mask.get(x, y);
        profile[y] = count;
    }
    return profile;
}

std::vector<int> rotated_row_profile(const BinaryMask& mask, double angle_deg) {
    std::vector<int> profile;
    rotated_peak(mask, mask_bbox(mask), angle_deg, &profile);
    return profile;
}

RotationResult find_rotation(const BinaryMask& mask, const RotationOptions& opt) {
    if (!mask.any()) throw EmptyMaskError("find_rotation: empty mask");
    const int n_angles = std::max(1, (int)std::lround(180.0 / opt.step_deg));

    int factor = 1;
    const int side = std::max(mask.width, mask.height);
    if (opt.downsample_cap > 0 && side > opt.downsample_cap)
        factor = (side + opt.downsample_cap - 1) / opt.downsample_cap;
    BinaryMask coarse_mask = (factor > 1) ? downsample(mask, factor) : mask;
    if (!coarse_mask.any()) {
        coarse_mask = mask;  // stride sampling lost everything; use full res
        factor = 1;
    }

    std::vector<int> all(n_angles);
    for (int i = 0; i < n_angles; ++i) all[i] = i;
    const Bbox coarse_bb = mask_bbox(coarse_mask);
    const ScanBest coarse = scan_angles(coarse_mask, coarse_bb, opt.step_deg, all);

    // Full-resolution refinement around the coarse optimum.
    const int halfwin = std::max(0, (int)std::ceil(opt.refine_window_deg / opt.step_deg));
    std::vector<int> window;
    for (int d = -halfwin; d <= halfwin; ++d)
        window.push_back(((coarse.index + d) % n_angles + n_angles) % n_angles);
    std::sort(window.begin(), window.end());
    window.erase(std::unique(window.begin(), window.end()), window.end());
    const Bbox full_bb = mask_bbox(mask);
    const ScanBest fine = scan_angles(mask, full_bb, opt.step_deg, window);

    RotationResult r;
    r.angle_deg = fine.index * opt.step_deg;
    rotated_peak(mask, full_bb, r.angle_deg, &r.profile);
    r.profile_peak = *std::max_element(r.profile.begin(), r.profile.end());
    return r;
}

RotationResult find_rotation_exhaustive(const BinaryMask& mask, double step_deg) {
    if (!mask.any()) throw EmptyMaskError("find_rotation: empty mask");
    const int n_angles = std::max(1, (int)std::lround(180.0 / step_deg));
    std::vector<int> all(n_angles);
    for (int i = 0; i < n_angles; ++i) all[i] = i;
    const Bbox bb = mask_bbox(mask);
    const ScanBest best = scan_angles(mask, bb, step_deg, all);
    RotationResult r;
    r.angle_deg = best.index * step_deg;
    rotated_peak(mask, bb, r.angle_deg, &r.profile);
    r.profile_peak = *std::max_element(r.profile.begin(), r.profile.end());
    return r;
}

OrientPlan plan_orientation(const BinaryMask& mask, double angle_deg, int margin) {
    if (!mask.any()) throw EmptyMaskError("apply_orientation: empty mask");
    OrientPlan plan;
    plan.angle_deg = angle_deg;
    plan.rotated_mask = rotate_mask(mask, angle_deg);
    plan.rot_width = plan.rotated_mask.width;
    plan.rot_height = plan.rotated_mask.height;
    const Bbox bb = mask_bbox(plan.rotated_mask);
    if (bb.empty()) throw EmptyMaskError("apply_orientation: mask lost in resampling");
    plan.crop_x = std::max(0, bb.x0 - margin);
    plan.crop_y = std::max(0, bb.y0 - margin);
    plan.crop_width = std::min(plan.rot_width - 1, bb.x1 + margin) - plan.crop_x + 1;
    plan.crop_height = std::min(plan.rot_height - 1, bb.y1 + margin) - plan.crop_y + 1;
    return plan;
}

RgbImage apply_plan(const OrientPlan& plan, const RgbImage& img, Rgb8 fill) {
    RgbImage rotated = rotate_image(img, plan.angle_deg, fill);
    RgbImage out(plan.crop_width, plan.crop_height);
    for (int y = 0; y < plan.crop_height; ++y)
        for (int x = 0; x < plan.crop_width; ++x)
            out.at(x, y) = rotated.at(x + plan.crop_x, y + plan.crop_y);
    return out;
}

GrayImage apply_plan(const OrientPlan& plan, const GrayImage& img, std::uint8_t fill) {
    GrayImage rotated = rotate_image(img, plan.angle_deg, fill);
    GrayImage out(plan.crop_width, plan.crop_height);
    for (int y = 0; y < plan.crop_height; ++y)
        for (int x = 0; x < plan.crop_width; ++x)
            out.at(x, y) = rotated.at(x + plan.crop_x, y + plan.crop_y);
    return out;
}

BinaryMask apply_plan_mask(const OrientPlan& plan) {
    BinaryMask out(plan.crop_width, plan.crop_height);
    for (int y = 0; y < plan.crop_height; ++y)
        for (int x = 0; x < plan.crop_width; ++x)
            out.set(x, y, plan.rotated_mask.get(x + plan.crop_x, y + plan.crop_y));
    return out;
}

std::pair<RgbImage, BinaryMask> apply_orientation(const RgbImage& img, const BinaryMask& mask,
                                                  const RotationResult& r, int margin) {
    const OrientPlan plan = plan_orientation(mask, r.angle_deg, margin);
    return {apply_plan(plan, img), apply_plan_mask(plan)};
}

std::pair<GrayImage, BinaryMask> apply_orientation(const GrayImage& img, const BinaryMask& mask,
                                                   const RotationResult& r, int margin) {
    const OrientPlan plan = plan_orientation(mask, r.angle_deg, margin);
    return {apply_plan(plan, img), apply_plan_mask(plan)};
}

}  // namespace epiquant
