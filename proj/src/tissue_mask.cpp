#include "epiquant/tissue_mask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epiquant/errors.hpp"

namespace epiquant {

namespace {

// Large finite stand-in for "no source"; keeps the envelope arithmetic finite
// while staying far above any real squared distance on our canvases.
constexpr double kFar = 1e15;

// 1-D squared-distance lower envelope (Felzenszwalb & Huttenlocher).
void dt1d(const double* f, double* d, int* v, double* z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = kFar;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = double(q - v[k]) * (q - v[k]) + f[v[k]];
    }
}

// In-place 2-D squared Euclidean distance transform of a cost grid
// (0 at sources, kFar elsewhere).
void squared_edt(std::vector<double>& f, int w, int h) {
    const int n = std::max(w, h);
    std::vector<double> tmp(n), d(n);
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) tmp[y] = f[std::size_t(y) * w + x];
        dt1d(tmp.data(), d.data(), v.data(), z.data(), h);
        for (int y = 0; y < h; ++y) f[std::size_t(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        double* row = f.data() + std::size_t(y) * w;
        std::copy(row, row + w, tmp.data());
        dt1d(tmp.data(), d.data(), v.data(), z.data(), w);
        std::copy(d.data(), d.data() + w, row);
    }
}

BinaryMask pad_mask(const BinaryMask& mask, int pad) {
    BinaryMask out(mask.width + 2 * pad, mask.height + 2 * pad);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) out.set(x + pad, y + pad, true);
    return out;
}

BinaryMask crop_mask(const BinaryMask& mask, int pad, int w, int h) {
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.set(x, y, mask.get(x + pad, y + pad));
    return out;
}

}  // namespace

int otsu_threshold(const std::array<std::uint64_t, 256>& histogram) {
    std::uint64_t total = 0, weighted = 0;
    int lo = -1, hi = -1;
    for (int v = 0; v < 256; ++v) {
        if (histogram[v]) {
            if (lo < 0) lo = v;
            hi = v;
        }
        total += histogram[v];
        weighted += std::uint64_t(v) * histogram[v];
    }
    if (total == 0) return 0;
    if (lo == hi) return lo;  // constant image

    double best = -1.0;
    int best_t = lo;
    std::uint64_t w0 = 0, sum0 = 0;
    for (int t = 0; t < 256; ++t) {
        w0 += histogram[t];
        sum0 += std::uint64_t(t) * histogram[t];
        const std::uint64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = double(sum0) / double(w0);
        const double mu1 = double(weighted - sum0) / double(w1);
        const double var = double(w0) * double(w1) * (mu0 - mu1) * (mu0 - mu1);
        if (var > best) {
            best = var;
            best_t = t;
        }
    }
    return best_t;
}

int otsu_threshold(const GrayImage& img) {
    std::array<std::uint64_t, 256> hist{};
    for (auto v : img.data) ++hist[v];
    return otsu_threshold(hist);
}

BinaryMask morph_erode(const BinaryMask& mask, DiskSE se) {
    const int w = mask.width, h = mask.height;
    const int w2 = w + 2, h2 = h + 2;
    // Sources are background pixels plus the implicit false ring outside the
    // canvas; a pixel survives iff no background lies within the disk.
    std::vector<double> f(std::size_t(w2) * h2, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.get(x, y)) f[std::size_t(y + 1) * w2 + (x + 1)] = kFar;
    squared_edt(f, w2, h2);
    const double r2 = double(se.radius) * se.radius;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.set(x, y, mask.get(x, y) && f[std::size_t(y + 1) * w2 + (x + 1)] > r2);
    return out;
}

BinaryMask morph_dilate(const BinaryMask& mask, DiskSE se) {
    const int w = mask.width, h = mask.height;
    std::vector<double> f(std::size_t(w) * h);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = mask.data[i] ? 0.0 : kFar;
    squared_edt(f, w, h);
    const double r2 = double(se.radius) * se.radius;
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < f.size(); ++i) out.data[i] = (f[i] <= r2) ? 1 : 0;
    return out;
}

BinaryMask morph_open(const BinaryMask& mask, DiskSE se) {
    return morph_dilate(morph_erode(mask, se), se);
}

BinaryMask morph_close(const BinaryMask& mask, DiskSE se) {
    // Dilation may extend up to r beyond the canvas; evaluate on an expanded
    // domain so the following erosion sees it, then crop back.
    const int pad = se.radius + 1;
    BinaryMask padded = pad_mask(mask, pad);
    return crop_mask(morph_erode(morph_dilate(padded, se), se), pad, mask.width, mask.height);
}

BinaryMask fill_holes(const BinaryMask& mask, int hole_connectivity) {
    const int w = mask.width, h = mask.height;
    std::vector<std::uint8_t> reached(std::size_t(w) * h, 0);
    std::vector<int> stack;
    auto push = [&](int x, int y) {
        const std::size_t i = std::size_t(y) * w + x;
        if (!mask.data[i] && !reached[i]) {
            reached[i] = 1;
            stack.push_back(y * w + x);
        }
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w, y = i / w;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                if (hole_connectivity == 4 && dx != 0 && dy != 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (nx >= 0 && ny >= 0 && nx < w && ny < h) push(nx, ny);
            }
        }
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (mask.data[i] || !reached[i]) ? 1 : 0;
    return out;
}

BinaryMask largest_component(const BinaryMask& mask, int connectivity) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(std::size_t(w) * h, -1);
    std::vector<int> stack;
    int best_label = -1;
    std::size_t best_size = 0;
    int next_label = 0;
    for (std::size_t start = 0; start < mask.data.size(); ++start) {
        if (!mask.data[start] || label[start] >= 0) continue;
        const int cur = next_label++;
        std::size_t size = 0;
        label[start] = cur;
        stack.push_back(int(start));
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            ++size;
            const int x = i % w, y = i / w;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (connectivity == 4 && dx != 0 && dy != 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const std::size_t ni = std::size_t(ny) * w + nx;
                    if (mask.data[ni] && label[ni] < 0) {
                        label[ni] = cur;
                        stack.push_back(int(ni));
                    }
                }
            }
        }
        // Strict > keeps the earlier (row-major first) component on ties.
        if (size > best_size) {
            best_size = size;
            best_label = cur;
        }
    }
    if (best_label < 0) throw EmptyMaskError("largest_component: mask has no true pixel");
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (label[i] == best_label) ? 1 : 0;
    return out;
}

BinaryMask build_tissue_mask(const GrayImage& hema_display, const TissueMaskOptions& opt) {
    auto [mn, mx] = std::minmax_element(hema_display.data.begin(), hema_display.data.end());
    if (hema_display.data.empty() || *mn == *mx)
        throw EmptyMaskError("tissue mask: hematoxylin channel has no contrast");

    const int t = otsu_threshold(hema_display);
    BinaryMask mask(hema_display.width, hema_display.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = (hema_display.data[i] <= t) ? 1 : 0;  // stain renders dark

    const DiskSE se{opt.se_radius};
    const int hole_conn = (opt.component_connectivity == 8) ? 4 : 8;
    auto pass = [&](BinaryMask m) {
        m = morph_open(m, se);
        m = morph_close(m, se);
        return fill_holes(m, hole_conn);
    };
    mask = pass(std::move(mask));
    mask = largest_component(mask, opt.component_connectivity);
    mask = pass(std::move(mask));
    if (!mask.any()) throw EmptyMaskError("tissue mask: empty after morphology");
    return mask;
}

}  // namespace epiquant
