#include "epiquant/stain_normalize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "epiquant/errors.hpp"
#include "epiquant/image_core.hpp"
#include "epiquant/stain_deconvolve.hpp"

namespace epiquant {

namespace {

LabStats lab_stats_of(const LabImage& lab, double eps) {
    const double n = double(lab.data.size());
    double sum[3] = {}, sumsq[3] = {};
    for (const LabPixel& p : lab.data) {
        const double v[3] = {p.l, p.a, p.b};
        for (int c = 0; c < 3; ++c) {
            sum[c] += v[c];
            sumsq[c] += v[c] * v[c];
        }
    }
    LabStats s;
    double* means[3] = {&s.mean_l, &s.mean_a, &s.mean_b};
    double* stds[3] = {&s.std_l, &s.std_a, &s.std_b};
    for (int c = 0; c < 3; ++c) {
        const double mean = sum[c] / n;
        const double var = std::max(0.0, sumsq[c] / n - mean * mean);
        *means[c] = mean;
        *stds[c] = std::max(std::sqrt(var), eps);  // population std, floored
    }
    return s;
}

// Linear-interpolation percentile over a copy of the values.
double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * (v.size() - 1);
    const std::size_t lo = (std::size_t)pos;
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - lo;
    return v[lo] * (1 - frac) + v[hi] * frac;
}

inline std::uint8_t od_to_level(double od) {
    return (std::uint8_t)std::clamp(std::lround(255.0 * std::pow(10.0, -od)), 0L, 255L);
}

}  // namespace

LabStats lab_stats(const RgbImage& img, double eps) {
    return lab_stats_of(rgb_to_lab(img), eps);
}

RgbImage reinhard_transfer(const RgbImage& src, const LabStats& target, double eps) {
    LabImage lab = rgb_to_lab(src);
    const LabStats s = lab_stats_of(lab, eps);
    const double scale[3] = {target.std_l / s.std_l, target.std_a / s.std_a,
                             target.std_b / s.std_b};
    for (LabPixel& p : lab.data) {
        p.l = (p.l - s.mean_l) * scale[0] + target.mean_l;
        p.a = (p.a - s.mean_a) * scale[1] + target.mean_a;
        p.b = (p.b - s.mean_b) * scale[2] + target.mean_b;
    }
    return lab_to_rgb(lab);
}

RgbImage reinhard_normalize(const RgbImage& src, const LabStats& target, double eps) {
    return min_max_stretch(reinhard_transfer(src, target, eps));
}

RgbImage histogram_specification(const RgbImage& src, const RgbImage& reference) {
    RgbImage out(src.width, src.height);
    for (int ch = 0; ch < 3; ++ch) {
        auto channel = [ch](const Rgb8& p) -> std::uint8_t {
            return ch == 0 ? p.r : (ch == 1 ? p.g : p.b);
        };
        std::array<std::uint64_t, 256> hs{}, hr{};
        for (const Rgb8& p : src.data) ++hs[channel(p)];
        for (const Rgb8& p : reference.data) ++hr[channel(p)];

        // m(v) = smallest u with cdf_ref(u) >= cdf_src(v); both CDFs are
        // non-decreasing so u advances monotonically with v.
        std::array<std::uint8_t, 256> map{};
        const double ns = double(src.data.size()), nr = double(reference.data.size());
        double cs = 0.0, cr = hr[0] / nr;
        int u = 0;
        for (int v = 0; v < 256; ++v) {
            cs += hs[v] / ns;
            while (u < 255 && cr < cs - 1e-12) cr += hr[++u] / nr;
            map[v] = (std::uint8_t)u;
        }
        for (std::size_t i = 0; i < src.data.size(); ++i) {
            const std::uint8_t mapped = map[channel(src.data[i])];
            if (ch == 0)
                out.data[i].r = mapped;
            else if (ch == 1)
                out.data[i].g = mapped;
            else
                out.data[i].b = mapped;
        }
    }
    return out;
}

namespace {

struct MacenkoDecomposition {
    Eigen::Matrix<double, 3, 2> stains;  // columns are unit stain OD vectors
    Eigen::Matrix2Xd concentrations;     // per pixel, all pixels of the image
};

MacenkoDecomposition macenko_decompose(const RgbImage& src, const MacenkoParams& params) {
    const OdImage od = od_from_rgb(src);

    std::vector<Eigen::Vector3d> cloud;
    cloud.reserve(od.data.size());
    for (const auto& v : od.data)
        if (v[0] > params.od_cutoff && v[1] > params.od_cutoff && v[2] > params.od_cutoff)
            cloud.emplace_back(v[0], v[1], v[2]);
    if ((int)cloud.size() < params.min_pixels)
        throw DegenerateInputError("macenko: too few pixels above the OD cutoff");

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : cloud) mean += p;
    mean /= double(cloud.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : cloud) {
        const Eigen::Vector3d d = p - mean;
        cov += d * d.transpose();
    }
    cov /= double(cloud.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    // Eigenvalues ascending: columns 1 and 2 span the principal plane.
    Eigen::Matrix<double, 3, 2> plane;
    plane.col(0) = eig.eigenvectors().col(2);
    plane.col(1) = eig.eigenvectors().col(1);
    for (int c = 0; c < 2; ++c)
        if (plane.col(c).sum() < 0) plane.col(c) = -plane.col(c);

    std::vector<double> phi(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double p0 = plane.col(0).dot(cloud[i]);
        const double p1 = plane.col(1).dot(cloud[i]);
        phi[i] = std::atan2(p1, p0);
    }
    const double a = params.alpha_percentile;
    const double phi_min = percentile(phi, a);
    const double phi_max = percentile(phi, 100.0 - a);

    auto extreme = [&](double angle) {
        Eigen::Vector3d v = plane.col(0) * std::cos(angle) + plane.col(1) * std::sin(angle);
        if (v.sum() < 0) v = -v;
        return Eigen::Vector3d(v.normalized());
    };
    Eigen::Vector3d v1 = extreme(phi_min);
    Eigen::Vector3d v2 = extreme(phi_max);
    if (v1(0) < v2(0)) std::swap(v1, v2);  // higher red OD first (hematoxylin-like)

    MacenkoDecomposition dec;
    dec.stains.col(0) = v1;
    dec.stains.col(1) = v2;

    // Least-squares concentrations for every pixel of the image.
    const Eigen::Matrix2d gram = dec.stains.transpose() * dec.stains;
    const Eigen::Matrix<double, 2, 3> solve = gram.inverse() * dec.stains.transpose();
    dec.concentrations.resize(2, (Eigen::Index)od.data.size());
    for (std::size_t i = 0; i < od.data.size(); ++i) {
        const Eigen::Vector3d v(od.data[i][0], od.data[i][1], od.data[i][2]);
        dec.concentrations.col((Eigen::Index)i) = solve * v;
    }
    return dec;
}

}  // namespace

MacenkoStains macenko_estimate_stains(const RgbImage& src, const MacenkoParams& params) {
    const MacenkoDecomposition dec = macenko_decompose(src, params);
    MacenkoStains out;
    for (int i = 0; i < 3; ++i) {
        out.stain1[i] = dec.stains(i, 0);
        out.stain2[i] = dec.stains(i, 1);
    }
    return out;
}

RgbImage macenko_normalize(const RgbImage& src, const MacenkoParams& params) {
    const MacenkoDecomposition dec = macenko_decompose(src, params);
    const Eigen::Index n = dec.concentrations.cols();

    std::vector<double> c1(n), c2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c1[i] = dec.concentrations(0, i);
        c2[i] = dec.concentrations(1, i);
    }
    const double max1 = percentile(c1, params.beta_percentile);
    const double max2 = percentile(c2, params.beta_percentile);
    const double s1 = (max1 > 1e-12) ? params.ref_max_c1 / max1 : 1.0;
    const double s2 = (max2 > 1e-12) ? params.ref_max_c2 / max2 : 1.0;

    RgbImage out(src.width, src.height);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k1 = std::max(0.0, dec.concentrations(0, i) * s1);
        const double k2 = std::max(0.0, dec.concentrations(1, i) * s2);
        const Eigen::Vector3d od = dec.stains.col(0) * k1 + dec.stains.col(1) * k2;
        out.data[(std::size_t)i] = {od_to_level(od(0)), od_to_level(od(1)), od_to_level(od(2))};
    }
    return out;
}

}  // namespace epiquant
