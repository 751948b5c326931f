#include "epiquant/dab_segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "epiquant/errors.hpp"

namespace epiquant {

namespace {

// Bounded draws derived from the raw mt19937_64 stream; the standard library
// distributions are not pinned across implementations, these are.
inline std::size_t draw_index(std::mt19937_64& gen, std::size_t n) { return gen() % n; }
inline double draw_unit(std::mt19937_64& gen) { return (gen() >> 11) * 0x1.0p-53; }

double sq_dist(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

}  // namespace

FeatureSet extract_features(const RgbImage& dab_rgb, const BinaryMask& mask, double eps) {
    if (!mask.any()) throw EmptyMaskError("extract_features: empty mask");
    FeatureSet f;
    f.d = 3;
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i]) f.pixel_index.push_back((int)i);
    f.n = (int)f.pixel_index.size();
    f.values.resize(std::size_t(f.n) * 3);
    f.col_mean.assign(3, 0.0);
    f.col_std.assign(3, 0.0);

    double sum[3] = {}, sumsq[3] = {};
    for (int i = 0; i < f.n; ++i) {
        const Rgb8& p = dab_rgb.data[f.pixel_index[i]];
        const double v[3] = {double(p.r), double(p.g), double(p.b)};
        for (int c = 0; c < 3; ++c) {
            f.values[std::size_t(i) * 3 + c] = v[c];
            sum[c] += v[c];
            sumsq[c] += v[c] * v[c];
        }
    }
    for (int c = 0; c < 3; ++c) {
        f.col_mean[c] = sum[c] / f.n;
        f.col_std[c] = std::sqrt(std::max(0.0, sumsq[c] / f.n - f.col_mean[c] * f.col_mean[c]));
        const double denom = std::max(f.col_std[c], eps);
        for (int i = 0; i < f.n; ++i) {
            double& v = f.values[std::size_t(i) * 3 + c];
            v = (v - f.col_mean[c]) / denom;
        }
    }
    return f;
}

Clustering kmeans(const FeatureSet& f, int k, std::uint64_t seed) {
    return kmeans(f, k, seed, nullptr);
}

Clustering kmeans(const FeatureSet& f, int k, std::uint64_t seed, std::vector<double>* sse_trace) {
    if (k > f.n) throw TooFewPointsError("kmeans: k exceeds point count");
    const int d = f.d;
    std::mt19937_64 gen(seed);

    Clustering c;
    c.k = k;
    c.d_ = d;
    c.centroids.resize(std::size_t(k) * d);
    c.labels.assign(f.n, 0);

    // k-means++ seeding.
    std::vector<double> min_d2(f.n, std::numeric_limits<double>::max());
    {
        const std::size_t first = draw_index(gen, f.n);
        std::copy_n(&f.values[first * d], d, &c.centroids[0]);
        for (int j = 1; j < k; ++j) {
            double total = 0.0;
            for (int i = 0; i < f.n; ++i) {
                const double d2 =
                    sq_dist(&f.values[std::size_t(i) * d], &c.centroids[std::size_t(j - 1) * d], d);
                min_d2[i] = std::min(min_d2[i], d2);
                total += min_d2[i];
            }
            std::size_t pick;
            if (total <= 0.0) {
                pick = draw_index(gen, f.n);
            } else {
                const double r = draw_unit(gen) * total;
                double acc = 0.0;
                pick = f.n - 1;
                for (int i = 0; i < f.n; ++i) {
                    acc += min_d2[i];
                    if (acc > r) {
                        pick = i;
                        break;
                    }
                }
            }
            std::copy_n(&f.values[pick * d], d, &c.centroids[std::size_t(j) * d]);
        }
    }

    std::vector<double> new_centroids(std::size_t(k) * d);
    std::vector<int> counts(k);
    std::vector<double> dist_to_own(f.n);
    for (int iter = 0; iter < 300; ++iter) {
        // Assignment; ties go to the lowest cluster index.
        for (int i = 0; i < f.n; ++i) {
            const double* p = &f.values[std::size_t(i) * d];
            int best = 0;
            double best_d2 = sq_dist(p, &c.centroids[0], d);
            for (int j = 1; j < k; ++j) {
                const double d2 = sq_dist(p, &c.centroids[std::size_t(j) * d], d);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = j;
                }
            }
            c.labels[i] = best;
            dist_to_own[i] = best_d2;
        }
        if (sse_trace) {
            double sse = 0.0;
            for (int i = 0; i < f.n; ++i) sse += dist_to_own[i];
            sse_trace->push_back(sse);
        }

        std::fill(new_centroids.begin(), new_centroids.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < f.n; ++i) {
            const int j = c.labels[i];
            ++counts[j];
            for (int col = 0; col < d; ++col)
                new_centroids[std::size_t(j) * d + col] += f.at(i, col);
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) {
                for (int col = 0; col < d; ++col) new_centroids[std::size_t(j) * d + col] /= counts[j];
            } else {
                // Re-seed an empty cluster to the farthest point.
                int far_i = 0;
                for (int i = 1; i < f.n; ++i)
                    if (dist_to_own[i] > dist_to_own[far_i]) far_i = i;
                std::copy_n(&f.values[std::size_t(far_i) * d], d,
                            &new_centroids[std::size_t(j) * d]);
                dist_to_own[far_i] = 0.0;  // do not hand one point to two clusters
            }
        }

        double movement = 0.0;
        for (int j = 0; j < k; ++j)
            movement = std::max(
                movement, std::sqrt(sq_dist(&c.centroids[std::size_t(j) * d],
                                            &new_centroids[std::size_t(j) * d], d)));
        c.centroids.swap(new_centroids);
        if (movement < 1e-6) break;
    }

    // Final assignment against the converged centroids.
    for (int i = 0; i < f.n; ++i) {
        const double* p = &f.values[std::size_t(i) * d];
        int best = 0;
        double best_d2 = sq_dist(p, &c.centroids[0], d);
        for (int j = 1; j < k; ++j) {
            const double d2 = sq_dist(p, &c.centroids[std::size_t(j) * d], d);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = j;
            }
        }
        c.labels[i] = best;
    }
    return c;
}

double davies_bouldin(const FeatureSet& f, const Clustering& c) {
    if (c.k < 2) throw UndefinedForKOneError("davies_bouldin: undefined for k < 2");
    const int k = c.k, d = f.d;
    std::vector<double> scatter(k, 0.0);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < f.n; ++i) {
        const int j = c.labels[i];
        scatter[j] += std::sqrt(
            sq_dist(&f.values[std::size_t(i) * d], &c.centroids[std::size_t(j) * d], d));
        ++counts[j];
    }
    for (int j = 0; j < k; ++j) {
        if (counts[j] == 0) throw DegenerateInputError("davies_bouldin: empty cluster");
        scatter[j] /= counts[j];
    }
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double dij = std::sqrt(
                sq_dist(&c.centroids[std::size_t(i) * d], &c.centroids[std::size_t(j) * d], d));
            const double ratio = (dij > 0.0) ? (scatter[i] + scatter[j]) / dij
                                             : std::numeric_limits<double>::infinity();
            worst = std::max(worst, ratio);
        }
        sum += worst;
    }
    return sum / k;
}

namespace {

Clustering single_cluster(const FeatureSet& f) {
    Clustering c;
    c.k = 1;
    c.d_ = f.d;
    c.labels.assign(f.n, 0);
    c.centroids.assign(f.d, 0.0);
    for (int i = 0; i < f.n; ++i)
        for (int col = 0; col < f.d; ++col) c.centroids[col] += f.at(i, col);
    for (int col = 0; col < f.d; ++col) c.centroids[col] /= std::max(1, f.n);
    return c;
}

}  // namespace

Clustering choose_k(const FeatureSet& f, const SegmentConfig& cfg) {
    const double max_std = *std::max_element(f.col_std.begin(), f.col_std.end());
    if (max_std < cfg.uniformity_tau || f.n < 3) return single_cluster(f);

    Clustering best;
    double best_db = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 3; ++k) {
        Clustering c = kmeans(f, k, cfg.seed);
        const double db = davies_bouldin(f, c);
        if (db < best_db) {  // strict: ties keep the smaller k
            best_db = db;
            best = std::move(c);
        }
    }
    return best;
}

void order_clusters_by_intensity(Clustering& c, const FeatureSet& f, const GrayImage& dab_gray) {
    std::vector<double> mean(c.k, 0.0);
    std::vector<int> counts(c.k, 0);
    for (int i = 0; i < f.n; ++i) {
        mean[c.labels[i]] += dab_gray.data[f.pixel_index[i]];
        ++counts[c.labels[i]];
    }
    for (int j = 0; j < c.k; ++j) mean[j] = counts[j] ? mean[j] / counts[j] : 255.0;

    std::vector<int> order(c.k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return mean[a] < mean[b]; });

    std::vector<int> rank(c.k);
    for (int pos = 0; pos < c.k; ++pos) rank[order[pos]] = pos;

    std::vector<double> new_centroids(c.centroids.size());
    c.mean_display_intensity.assign(c.k, 0.0);
    for (int j = 0; j < c.k; ++j) {
        std::copy_n(&c.centroids[std::size_t(j) * c.d_], c.d_,
                    &new_centroids[std::size_t(rank[j]) * c.d_]);
        c.mean_display_intensity[rank[j]] = mean[j];
    }
    c.centroids.swap(new_centroids);
    for (int& l : c.labels) l = rank[l];
}

SegmentResult select_dab_region(const RgbImage& dab_rgb, const GrayImage& dab_gray,
                                const BinaryMask& mask, const SegmentConfig& cfg) {
    const FeatureSet f = extract_features(dab_rgb, mask, cfg.eps);
    Clustering c = choose_k(f, cfg);
    order_clusters_by_intensity(c, f, dab_gray);

    SegmentResult res;
    res.k = c.k;
    res.dab_mask = BinaryMask(mask.width, mask.height);
    if (c.k == 1) {
        // All-or-nothing: the region is DAB only if it is dark overall.
        if (c.mean_display_intensity[0] < cfg.dark_tau)
            for (int i : f.pixel_index) res.dab_mask.data[i] = 1;
    } else {
        for (int i = 0; i < f.n; ++i)
            if (c.labels[i] == 0) res.dab_mask.data[f.pixel_index[i]] = 1;
    }
    res.clustering = std::move(c);
    return res;
}

}  // namespace epiquant
