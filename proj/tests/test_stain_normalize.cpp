#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "epiquant/errors.hpp"
#include "epiquant/image_core.hpp"
#include "epiquant/stain_deconvolve.hpp"
#include "epiquant/stain_normalize.hpp"
#include "support/phantoms.hpp"

using namespace epiquant;

TEST_CASE("lab_stats conventions") {
    RgbImage gray(8, 8, {120, 120, 120});
    const LabStats s = lab_stats(gray);
    CHECK(s.std_l == 1e-6);  // floored
    CHECK(std::abs(s.mean_a) < 1.0);

    RgbImage bw(2, 1);
    bw.at(0, 0) = {255, 255, 255};
    bw.at(1, 0) = {0, 0, 0};
    const LabStats t = lab_stats(bw);
    CHECK(t.mean_l == doctest::Approx(50.0).epsilon(1e-3));
    CHECK(t.std_l == doctest::Approx(50.0).epsilon(1e-3));  // population convention

    // Permutation invariance.
    RgbImage a(4, 1), b(4, 1);
    const Rgb8 px[4] = {{10, 200, 30}, {200, 10, 90}, {5, 5, 250}, {100, 100, 100}};
    for (int i = 0; i < 4; ++i) {
        a.data[i] = px[i];
        b.data[i] = px[3 - i];
    }
    const LabStats sa = lab_stats(a), sb = lab_stats(b);
    CHECK(sa.mean_l == doctest::Approx(sb.mean_l).epsilon(1e-12));
    CHECK(sa.std_b == doctest::Approx(sb.std_b).epsilon(1e-12));
}

TEST_CASE("reinhard self-normalization reduces to the stretch") {
    const RgbImage src = phantoms::tissue_phantom(80, 60, 50, 20, 0.4).image;
    const RgbImage out = reinhard_normalize(src, lab_stats(src));
    const RgbImage want = min_max_stretch(src);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        CHECK(std::abs(out.data[i].r - want.data[i].r) <= 1);
        CHECK(std::abs(out.data[i].g - want.data[i].g) <= 1);
        CHECK(std::abs(out.data[i].b - want.data[i].b) <= 1);
    }
}

TEST_CASE("reinhard constant source goes to target means then zeros") {
    RgbImage flat(6, 4, {180, 140, 120});
    LabStats target;
    target.mean_l = 60;
    target.mean_a = 5;
    target.mean_b = -10;
    target.std_l = 10;
    target.std_a = 3;
    target.std_b = 4;
    const RgbImage transferred = reinhard_transfer(flat, target);
    const Rgb8 expect = lab_to_rgb({60, 5, -10});
    for (const Rgb8& p : transferred.data) CHECK(p == expect);
    const RgbImage stretched = reinhard_normalize(flat, target);
    for (const Rgb8& p : stretched.data) CHECK(p == Rgb8{0, 0, 0});
}

TEST_CASE("reinhard transfer matches a per-pixel scalar oracle") {
    RgbImage src(2, 2);
    src.at(0, 0) = {200, 120, 90};
    src.at(1, 0) = {90, 130, 200};
    src.at(0, 1) = {60, 180, 60};
    src.at(1, 1) = {240, 240, 230};
    LabStats target;
    target.mean_l = 70;
    target.mean_a = 8;
    target.mean_b = -5;
    target.std_l = 15;
    target.std_a = 6;
    target.std_b = 9;

    // Scalar oracle: recompute stats and the per-channel affine map by hand.
    double sum[3] = {}, sumsq[3] = {};
    for (const Rgb8& p : src.data) {
        const LabPixel q = rgb_to_lab(p);
        const double v[3] = {q.l, q.a, q.b};
        for (int c = 0; c < 3; ++c) {
            sum[c] += v[c];
            sumsq[c] += v[c] * v[c];
        }
    }
    double mean[3], sd[3];
    for (int c = 0; c < 3; ++c) {
        mean[c] = sum[c] / 4.0;
        sd[c] = std::sqrt(std::max(0.0, sumsq[c] / 4.0 - mean[c] * mean[c]));
    }
    const double tmean[3] = {target.mean_l, target.mean_a, target.mean_b};
    const double tsd[3] = {target.std_l, target.std_a, target.std_b};

    const RgbImage got = reinhard_transfer(src, target);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        const LabPixel q = rgb_to_lab(src.data[i]);
        const double in[3] = {q.l, q.a, q.b};
        double out[3];
        for (int c = 0; c < 3; ++c) out[c] = (in[c] - mean[c]) * (tsd[c] / sd[c]) + tmean[c];
        const Rgb8 expect = lab_to_rgb({out[0], out[1], out[2]});
        CHECK(std::abs(got.data[i].r - expect.r) <= 1);
        CHECK(std::abs(got.data[i].g - expect.g) <= 1);
        CHECK(std::abs(got.data[i].b - expect.b) <= 1);
    }
}

TEST_CASE("reinhard pre-stretch stats land on the target") {
    const RgbImage src = phantoms::tissue_phantom(120, 90, 90, 30, 0.35, 3).image;
    const RgbImage ref = phantoms::tissue_phantom(120, 90, 100, 40, 0.15, 5).image;
    const LabStats target = lab_stats(ref);
    const LabStats got = lab_stats(reinhard_transfer(src, target));
    CHECK(std::abs(got.mean_l - target.mean_l) <= 0.5);
    CHECK(std::abs(got.mean_a - target.mean_a) <= 0.5);
    CHECK(std::abs(got.mean_b - target.mean_b) <= 0.5);
    CHECK(std::abs(got.std_l - target.std_l) <= 0.5);
    CHECK(std::abs(got.std_a - target.std_a) <= 0.5);
    CHECK(std::abs(got.std_b - target.std_b) <= 0.5);
}

TEST_CASE("histogram specification basics") {
    const RgbImage src = phantoms::tissue_phantom(60, 40, 40, 14, 0.3).image;
    const RgbImage self = histogram_specification(src, src);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        CHECK(std::abs(self.data[i].r - src.data[i].r) <= 1);
        CHECK(std::abs(self.data[i].g - src.data[i].g) <= 1);
        CHECK(std::abs(self.data[i].b - src.data[i].b) <= 1);
    }

    RgbImage c100(5, 5, {100, 100, 100});
    RgbImage c200(5, 5, {200, 200, 200});
    const RgbImage mapped = histogram_specification(c100, c200);
    for (const Rgb8& p : mapped.data) CHECK(p == Rgb8{200, 200, 200});
}

TEST_CASE("histogram specification against the CDF-inversion oracle") {
    // Uniform source, two-delta reference: output takes only the two values,
    // split near the CDF midpoint.
    RgbImage src(256, 1);
    for (int v = 0; v < 256; ++v)
        src.at(v, 0) = {(std::uint8_t)v, (std::uint8_t)v, (std::uint8_t)v};
    RgbImage ref(2, 1);
    ref.at(0, 0) = {64, 64, 64};
    ref.at(1, 0) = {192, 192, 192};
    const RgbImage out = histogram_specification(src, ref);
    int n64 = 0, n192 = 0;
    for (const Rgb8& p : out.data) {
        CHECK((p.r == 64 || p.r == 192));
        n64 += (p.r == 64);
        n192 += (p.r == 192);
    }
    CHECK(n64 == 128);  // CDF of the reference jumps to 0.5 at 64
    CHECK(n192 == 128);
}

TEST_CASE("histogram specification CDF sup-norm bound") {
    // Continuous-like source (every value equally occupied).
    RgbImage src(256, 256);
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x)
            src.at(x, y) = {(std::uint8_t)x, (std::uint8_t)x, (std::uint8_t)x};
    RgbImage ref(256, 1);
    for (int v = 0; v < 256; ++v) {
        const auto s = (std::uint8_t)std::lround(255.0 * std::sqrt(v / 255.0));
        ref.at(v, 0) = {s, s, s};
    }
    const RgbImage out = histogram_specification(src, ref);

    std::array<double, 256> cdf_out{}, cdf_ref{};
    for (const Rgb8& p : out.data) cdf_out[p.r] += 1.0 / out.data.size();
    for (const Rgb8& p : ref.data) cdf_ref[p.r] += 1.0 / ref.data.size();
    double sup = 0.0, co = 0.0, cr = 0.0;
    for (int v = 0; v < 256; ++v) {
        co += cdf_out[v];
        cr += cdf_ref[v];
        sup = std::max(sup, std::abs(co - cr));
    }
    CHECK(sup <= 1.0 / 256 + 1e-9);
}

namespace {

// Forward synthesis from two known stain vectors with wedge-shaped mixtures.
RgbImage macenko_synthetic(const double v1[3], const double v2[3], int n, std::uint64_t seed) {
    phantoms::Rng rng(seed);
    RgbImage img(n, 1);
    for (int i = 0; i < n; ++i) {
        double c1 = 0, c2 = 0;
        const int mode = i % 4;
        if (mode == 0) c1 = 0.8 + 0.5 * rng.unit();            // pure stain 1
        else if (mode == 1) c2 = 0.8 + 0.5 * rng.unit();       // pure stain 2
        else {
            c1 = 0.6 + 0.5 * rng.unit();
            c2 = 0.6 + 0.5 * rng.unit();
        }
        std::uint8_t* ch[3] = {&img.data[i].r, &img.data[i].g, &img.data[i].b};
        for (int k = 0; k < 3; ++k) {
            const double od = c1 * v1[k] + c2 * v2[k];
            *ch[k] = (std::uint8_t)std::clamp(std::lround(255.0 * std::pow(10.0, -od)), 0L, 255L);
        }
    }
    return img;
}

double angle_between(const double a[3], const double b[3]) {
    double dot = 0, na = 0, nb = 0;
    for (int k = 0; k < 3; ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    return std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0));
}

}  // namespace

TEST_CASE("macenko recovers synthetic stain vectors") {
    const StainMatrix m = hdab_stain_matrix();
    const RgbImage img = macenko_synthetic(m.rows[0], m.rows[1], 4000, 11);
    const MacenkoStains est = macenko_estimate_stains(img);
    // stain1 is the higher red-OD vector, i.e. hematoxylin for H-DAB.
    CHECK(angle_between(est.stain1, m.rows[0]) < 0.05);
    CHECK(angle_between(est.stain2, m.rows[1]) < 0.05);
}

TEST_CASE("macenko rejects an all-white image") {
    RgbImage white(16, 16, {255, 255, 255});
    CHECK_THROWS_AS(macenko_normalize(white), DegenerateInputError);
}

TEST_CASE("macenko rescales concentrations to the reference maxima") {
    const StainMatrix m = hdab_stain_matrix();
    const RgbImage img = macenko_synthetic(m.rows[0], m.rows[1], 6000, 23);
    MacenkoParams params;
    const RgbImage out = macenko_normalize(img, params);
    CHECK(out.width == img.width);
    CHECK(out.height == img.height);

    // Re-estimate the output's stains and concentrations; the 99th percentile
    // must land on the configured reference maxima.
    const MacenkoStains est = macenko_estimate_stains(out, params);
    const OdImage od = od_from_rgb(out);
    double g11 = 0, g12 = 0, g22 = 0;
    for (int k = 0; k < 3; ++k) {
        g11 += est.stain1[k] * est.stain1[k];
        g12 += est.stain1[k] * est.stain2[k];
        g22 += est.stain2[k] * est.stain2[k];
    }
    const double det = g11 * g22 - g12 * g12;
    std::vector<double> c1, c2;
    for (const auto& v : od.data) {
        double b1 = 0, b2 = 0;
        for (int k = 0; k < 3; ++k) {
            b1 += est.stain1[k] * v[k];
            b2 += est.stain2[k] * v[k];
        }
        c1.push_back((g22 * b1 - g12 * b2) / det);
        c2.push_back((g11 * b2 - g12 * b1) / det);
    }
    std::sort(c1.begin(), c1.end());
    std::sort(c2.begin(), c2.end());
    const double p99_1 = c1[(std::size_t)(0.99 * (c1.size() - 1))];
    const double p99_2 = c2[(std::size_t)(0.99 * (c2.size() - 1))];
    CHECK(p99_1 == doctest::Approx(params.ref_max_c1).epsilon(0.01));
    CHECK(p99_2 == doctest::Approx(params.ref_max_c2).epsilon(0.01));
}

TEST_CASE("normalizers preserve dimensions and are deterministic") {
    const RgbImage src = phantoms::tissue_phantom(64, 48, 48, 16, 0.3).image;
    const LabStats target = lab_stats(phantoms::tissue_phantom(64, 48, 40, 20, 0.2, 9).image);
    const RgbImage r1 = reinhard_normalize(src, target);
    const RgbImage r2 = reinhard_normalize(src, target);
    CHECK(r1.data == r2.data);
    CHECK(r1.width == src.width);
    const RgbImage h1 = histogram_specification(src, src);
    CHECK(h1.height == src.height);
}
