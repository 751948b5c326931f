#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "epiquant/errors.hpp"
#include "epiquant/tissue_mask.hpp"
#include "support/oracles.hpp"

using namespace epiquant;

namespace {

BinaryMask random_mask(int w, int h, double density, std::mt19937_64& gen) {
    BinaryMask m(w, h);
    for (auto& v : m.data) v = (double(gen() >> 11) * 0x1.0p-53 < density) ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("otsu on crafted histograms") {
    std::array<std::uint64_t, 256> hist{};
    hist[50] = 1000;
    hist[200] = 1000;
    const int t = otsu_threshold(hist);
    CHECK(t >= 50);
    CHECK(t < 200);
    CHECK(t == oracles::otsu_scan(hist));

    std::array<std::uint64_t, 256> constant{};
    constant[77] = 123;
    CHECK(otsu_threshold(constant) == 77);

    std::array<std::uint64_t, 256> ramp{};
    for (int v = 0; v < 256; ++v) ramp[v] = 1;
    const int rt = otsu_threshold(ramp);
    CHECK(std::abs(rt - 127) <= 1);
    CHECK(rt == oracles::otsu_scan(ramp));
}

TEST_CASE("otsu equals the exhaustive scan on random histograms") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<std::uint64_t, 256> hist{};
        const int modes = 1 + int(gen() % 4);
        for (int m = 0; m < modes; ++m) {
            const int center = int(gen() % 256);
            const int spread = 1 + int(gen() % 40);
            for (int k = 0; k < 200; ++k) {
                const int v = center + int(gen() % (2 * spread + 1)) - spread;
                if (v >= 0 && v < 256) ++hist[v];
            }
        }
        CHECK(otsu_threshold(hist) == oracles::otsu_scan(hist));
    }
}

TEST_CASE("morphology basics with the r=15 disk") {
    // A single pixel vanishes under opening.
    BinaryMask speck(64, 64);
    speck.set(30, 30, true);
    CHECK(morph_open(speck, {15}).count_true() == 0);

    // Full mask is a fixed point of both open and close.
    BinaryMask full(48, 40, true);
    CHECK(morph_open(full, {15}) == full);
    CHECK(morph_close(full, {15}) == full);

    // A 5x5 hole in a 40x40 square closes.
    BinaryMask square(40, 40, true);
    for (int y = 18; y < 23; ++y)
        for (int x = 18; x < 23; ++x) square.set(x, y, false);
    const BinaryMask closed = morph_close(square, {15});
    CHECK(closed == oracles::close_sim(square, 15));
    CHECK(closed.count_true() == 40u * 40u);
}

TEST_CASE("morphology equals set-theoretic simulation on random masks") {
    std::mt19937_64 gen(7);
    const int radii[] = {1, 3, 7, 15};
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask m = random_mask(64, 64, 0.35 + 0.3 * (trial % 3), gen);
        const int r = radii[trial % 4];
        CHECK(morph_erode(m, {r}) == oracles::erode_sim(m, r));
        CHECK(morph_dilate(m, {r}) == oracles::dilate_sim(m, r));
        CHECK(morph_open(m, {r}) == oracles::open_sim(m, r));
        CHECK(morph_close(m, {r}) == oracles::close_sim(m, r));
        CHECK(fill_holes(m) == oracles::fill_sim(m));
    }
}

TEST_CASE("open anti-extensive, close extensive, both idempotent") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 8; ++trial) {
        const BinaryMask m = random_mask(48, 48, 0.5, gen);
        const int r = 2 + (trial % 3);
        const BinaryMask opened = morph_open(m, {r});
        const BinaryMask closed = morph_close(m, {r});
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            CHECK(opened.data[i] <= m.data[i]);
            CHECK(closed.data[i] >= m.data[i]);
        }
        CHECK(morph_open(opened, {r}) == opened);
        CHECK(morph_close(closed, {r}) == closed);
    }
}

TEST_CASE("fill_holes fills enclosed regions only") {
    BinaryMask donut(32, 32);
    for (int y = 8; y < 24; ++y)
        for (int x = 8; x < 24; ++x)
            if (x < 12 || x >= 20 || y < 12 || y >= 20) donut.set(x, y, true);
    const BinaryMask filled = fill_holes(donut);
    for (int y = 8; y < 24; ++y)
        for (int x = 8; x < 24; ++x) CHECK(filled.get(x, y));
    CHECK(filled.count_true() == 16u * 16u);

    // Never removes true pixels.
    for (std::size_t i = 0; i < donut.data.size(); ++i) CHECK(filled.data[i] >= donut.data[i]);
}

TEST_CASE("largest_component selection and tie-break") {
    BinaryMask m(40, 20);
    for (int y = 2; y < 12; ++y)
        for (int x = 2; x < 12; ++x) m.set(x, y, true);  // 100 px
    for (int y = 4; y < 9; ++y)
        for (int x = 20; x < 30; ++x) m.set(x, y, true);  // 50 px
    const BinaryMask kept = largest_component(m);
    CHECK(kept.count_true() == 100);
    CHECK(kept.get(5, 5));
    CHECK_FALSE(kept.get(25, 5));

    // Single blob is identity.
    CHECK(largest_component(kept) == kept);

    // Equal sizes: the component whose first pixel comes first row-major wins.
    BinaryMask ties(20, 10);
    for (int x = 5; x < 10; ++x) ties.set(x, 3, true);
    for (int x = 2; x < 7; ++x) ties.set(x, 6, true);
    const BinaryMask first = largest_component(ties);
    CHECK(first.get(5, 3));
    CHECK_FALSE(first.get(2, 6));

    BinaryMask empty(8, 8);
    CHECK_THROWS_AS(largest_component(empty), EmptyMaskError);
}

TEST_CASE("largest_component output is connected subset") {
    std::mt19937_64 gen(3);
    const BinaryMask m = random_mask(48, 48, 0.45, gen);
    const BinaryMask kept = largest_component(m);
    for (std::size_t i = 0; i < m.data.size(); ++i) CHECK(kept.data[i] <= m.data[i]);
}

TEST_CASE("build_tissue_mask on a synthetic stripe") {
    // White field (hema display 255) with one dark stripe.
    GrayImage hema(500, 300, 255);
    for (int y = 110; y < 190; ++y)
        for (int x = 50; x < 450; ++x) hema.at(x, y) = 40;
    const BinaryMask mask = build_tissue_mask(hema);
    const double area = double(mask.count_true());
    CHECK(area == doctest::Approx(400.0 * 80.0).epsilon(0.05));

    // Scattered small specks must not survive the opening.
    GrayImage speckled = hema;
    const int sx[] = {10, 480, 20, 470, 15, 490, 30, 460, 25, 8};
    const int sy[] = {10, 20, 280, 270, 150, 40, 290, 10, 60, 200};
    for (int i = 0; i < 10; ++i)
        for (int d = 0; d < 4; ++d) speckled.at(sx[i] + d % 2, sy[i] + d / 2) = 30;
    const BinaryMask cleaned = build_tissue_mask(speckled);
    for (int i = 0; i < 10; ++i) CHECK_FALSE(cleaned.get(sx[i], sy[i]));

    GrayImage white(64, 64, 255);
    CHECK_THROWS_AS(build_tissue_mask(white), EmptyMaskError);
}

TEST_CASE("build_tissue_mask yields one component") {
    GrayImage hema(400, 200, 250);
    for (int y = 60; y < 120; ++y)
        for (int x = 30; x < 330; ++x) hema.at(x, y) = 60;
    for (int y = 150; y < 170; ++y)
        for (int x = 350; x < 390; ++x) hema.at(x, y) = 60;  // small artifact
    const BinaryMask mask = build_tissue_mask(hema);
    CHECK(largest_component(mask) == mask);
    CHECK_FALSE(mask.get(360, 155));
}
