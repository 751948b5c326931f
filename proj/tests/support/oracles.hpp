#pragma once

// Independent reference implementations the production code is checked
// against. These stay deliberately naive: direct definitions, no shared code
// with src/.

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "epiquant/dab_segment.hpp"
#include "epiquant/types.hpp"

namespace oracles {

using epiquant::BinaryMask;

// Exhaustive between-class-variance scan, recomputing class sums from
// scratch at every candidate threshold.
inline int otsu_scan(const std::array<std::uint64_t, 256>& hist) {
    std::uint64_t total = 0;
    int lo = -1, hi = -1;
    for (int v = 0; v < 256; ++v) {
        total += hist[v];
        if (hist[v]) {
            if (lo < 0) lo = v;
            hi = v;
        }
    }
    if (total == 0) return 0;
    if (lo == hi) return lo;
    double best = -1.0;
    int best_t = lo;
    for (int t = 0; t < 256; ++t) {
        std::uint64_t w0 = 0, sum0 = 0;
        for (int v = 0; v <= t; ++v) {
            w0 += hist[v];
            sum0 += std::uint64_t(v) * hist[v];
        }
        std::uint64_t w1 = 0, sum1 = 0;
        for (int v = t + 1; v < 256; ++v) {
            w1 += hist[v];
            sum1 += std::uint64_t(v) * hist[v];
        }
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = double(sum0) / double(w0);
        const double mu1 = double(sum1) / double(w1);
        const double var = double(w0) * double(w1) * (mu0 - mu1) * (mu0 - mu1);
        if (var > best) {
            best = var;
            best_t = t;
        }
    }
    return best_t;
}

// Disk footprint by definition.
inline std::vector<std::pair<int, int>> disk_offsets(int r) {
    std::vector<std::pair<int, int>> out;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r * r) out.emplace_back(dx, dy);
    return out;
}

// erosion(p) = AND over the footprint, pixels outside the canvas are false.
inline BinaryMask erode_sim(const BinaryMask& m, int r) {
    const auto se = disk_offsets(r);
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            bool all = true;
            for (const auto& [dx, dy] : se) {
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height || !m.get(nx, ny)) {
                    all = false;
                    break;
                }
            }
            out.set(x, y, all && m.get(x, y));
        }
    return out;
}

// dilation(p) = OR over the footprint.
inline BinaryMask dilate_sim(const BinaryMask& m, int r) {
    const auto se = disk_offsets(r);
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            bool hit = false;
            for (const auto& [dx, dy] : se) {
                const int nx = x + dx, ny = y + dy;
                if (nx >= 0 && ny >= 0 && nx < m.width && ny < m.height && m.get(nx, ny)) {
                    hit = true;
                    break;
                }
            }
            out.set(x, y, hit);
        }
    return out;
}

inline BinaryMask open_sim(const BinaryMask& m, int r) { return dilate_sim(erode_sim(m, r), r); }

// Closing evaluated over an expanded domain so the intermediate dilation is
// not clipped by the canvas.
inline BinaryMask close_sim(const BinaryMask& m, int r) {
    const int pad = r + 1;
    BinaryMask big(m.width + 2 * pad, m.height + 2 * pad);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) big.set(x + pad, y + pad, m.get(x, y));
    const BinaryMask closed = erode_sim(dilate_sim(big, r), r);
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) out.set(x, y, closed.get(x + pad, y + pad));
    return out;
}

// Border flood fill over false pixels (4-connectivity); unreached false
// pixels are holes.
inline BinaryMask fill_sim(const BinaryMask& m) {
    BinaryMask reached(m.width, m.height);
    std::deque<std::pair<int, int>> q;
    auto visit = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= m.width || y >= m.height) return;
        if (m.get(x, y) || reached.get(x, y)) return;
        reached.set(x, y, true);
        q.emplace_back(x, y);
    };
    for (int x = 0; x < m.width; ++x) {
        visit(x, 0);
        visit(x, m.height - 1);
    }
    for (int y = 0; y < m.height; ++y) {
        visit(0, y);
        visit(m.width - 1, y);
    }
    while (!q.empty()) {
        const auto [x, y] = q.front();
        q.pop_front();
        visit(x - 1, y);
        visit(x + 1, y);
        visit(x, y - 1);
        visit(x, y + 1);
    }
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) out.set(x, y, m.get(x, y) || !reached.get(x, y));
    return out;
}

// Davies-Bouldin straight from the formula.
inline double davies_bouldin_direct(const epiquant::FeatureSet& f, const epiquant::Clustering& c) {
    const int k = c.k, d = f.d;
    std::vector<double> s(k, 0.0);
    std::vector<int> n(k, 0);
    for (int i = 0; i < f.n; ++i) {
        const int j = c.labels[i];
        double acc = 0.0;
        for (int col = 0; col < d; ++col) {
            const double diff = f.at(i, col) - c.centroid(j, col);
            acc += diff * diff;
        }
        s[j] += std::sqrt(acc);
        ++n[j];
    }
    for (int j = 0; j < k; ++j) s[j] /= n[j];
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            double acc = 0.0;
            for (int col = 0; col < d; ++col) {
                const double diff = c.centroid(i, col) - c.centroid(j, col);
                acc += diff * diff;
            }
            const double dij = std::sqrt(acc);
            const double ratio =
                dij > 0.0 ? (s[i] + s[j]) / dij : std::numeric_limits<double>::infinity();
            if (ratio > worst) worst = ratio;
        }
        total += worst;
    }
    return total / k;
}

struct RocOracle {
    double best_threshold = 0.0;
    double best_j = -2.0;
    double auc = 0.0;
};

// Brute-force Youden scan plus trapezoid AUC with (0,0)/(1,1) anchors.
inline RocOracle roc_scan(const std::vector<double>& pos, const std::vector<double>& neg,
                          double lo, double hi, double step) {
    RocOracle res;
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
    const int n = (int)std::lround((hi - lo) / step) + 1;
    for (int i = 0; i < n; ++i) {
        const double t = lo + i * step;
        std::size_t tp = 0, fp = 0;
        for (double a : pos) tp += (a >= t);
        for (double a : neg) fp += (a >= t);
        const double tpr = double(tp) / pos.size();
        const double fpr = double(fp) / neg.size();
        pts.emplace_back(fpr, tpr);
        if (tpr - fpr > res.best_j) {
            res.best_j = tpr - fpr;
            res.best_threshold = t;
        }
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
        res.auc += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
    return res;
}

}  // namespace oracles
