#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "epiquant/errors.hpp"
#include "epiquant/stain_deconvolve.hpp"

using namespace epiquant;

TEST_CASE("od_from_rgb frozen values") {
    RgbImage img(3, 1);
    img.at(0, 0) = {255, 255, 255};
    img.at(1, 0) = {26, 26, 26};
    img.at(2, 0) = {0, 255, 255};
    const OdImage od = od_from_rgb(img);
    for (int c = 0; c < 3; ++c) CHECK(od.data[0][c] == 0.0);
    const double expect26 = -std::log10(26.0 / 255.0);
    for (int c = 0; c < 3; ++c) CHECK(od.data[1][c] == doctest::Approx(expect26).epsilon(1e-12));
    CHECK(od.data[2][0] == doctest::Approx(-std::log10(1.0 / 255.0)).epsilon(1e-12));
    CHECK(od.data[2][1] == 0.0);
    CHECK(od.data[2][2] == 0.0);
}

TEST_CASE("od_from_rgb is antitone per channel") {
    RgbImage img(256, 1);
    for (int v = 0; v < 256; ++v)
        img.at(v, 0) = {(std::uint8_t)v, (std::uint8_t)v, (std::uint8_t)v};
    const OdImage od = od_from_rgb(img);
    for (int v = 2; v < 256; ++v) CHECK(od.data[v][0] < od.data[v - 1][0]);
}

TEST_CASE("hdab stain matrix construction") {
    const StainMatrix m = hdab_stain_matrix();
    for (int i = 0; i < 3; ++i) {
        const double n = std::sqrt(m.rows[i][0] * m.rows[i][0] + m.rows[i][1] * m.rows[i][1] +
                                   m.rows[i][2] * m.rows[i][2]);
        CHECK(n == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (int i = 0; i < 2; ++i) {
        const double dot = m.rows[i][0] * m.rows[2][0] + m.rows[i][1] * m.rows[2][1] +
                           m.rows[i][2] * m.rows[2][2];
        CHECK(std::abs(dot) < 1e-9);
    }
    CHECK(std::abs(m.det()) > 1e-3);
}

TEST_CASE("deconvolve basis and white cases") {
    const StainMatrix m = hdab_stain_matrix();
    OdImage od(2, 1);
    od.data[0] = {0.0, 0.0, 0.0};
    od.data[1] = {m.rows[0][0], m.rows[0][1], m.rows[0][2]};  // 1.0 x hematoxylin
    const StainChannels ch = deconvolve(od, m);
    CHECK(ch.c_hema[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ch.c_dab[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ch.hema_display.data[0] == 255);
    CHECK(ch.dab_display.data[0] == 255);
    CHECK(ch.c_hema[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(ch.c_dab[1]) < 1e-9);
    CHECK(std::abs(ch.c_res[1]) < 1e-9);
}

TEST_CASE("deconvolve round trip on random concentrations") {
    const StainMatrix m = hdab_stain_matrix();
    std::mt19937_64 gen(123);
    auto unit = [&] { return double(gen() >> 11) * 0x1.0p-53; };
    const int trials = 1000;
    OdImage od(trials, 1);
    std::vector<std::array<double, 3>> truth(trials);
    for (int i = 0; i < trials; ++i) {
        const std::array<double, 3> c = {2.0 * unit(), 2.0 * unit(), 0.5 * unit()};
        truth[i] = c;
        for (int k = 0; k < 3; ++k)
            od.data[i][k] =
                c[0] * m.rows[0][k] + c[1] * m.rows[1][k] + c[2] * m.rows[2][k];
    }
    const StainChannels ch = deconvolve(od, m);
    for (int i = 0; i < trials; ++i) {
        CHECK(std::abs(ch.c_hema[i] - truth[i][0]) < 1e-9);
        CHECK(std::abs(ch.c_dab[i] - truth[i][1]) < 1e-9);
        CHECK(std::abs(ch.c_res[i] - truth[i][2]) < 1e-9);
    }
}

TEST_CASE("deconvolve rejects a singular matrix") {
    StainMatrix m = hdab_stain_matrix();
    for (int k = 0; k < 3; ++k) m.rows[2][k] = m.rows[0][k];
    OdImage od(1, 1);
    CHECK_THROWS_AS(deconvolve(od, m), SingularMatrixError);
}

TEST_CASE("dab display levels") {
    const StainMatrix m = hdab_stain_matrix();
    OdImage od(3, 1);
    od.data[0] = {0, 0, 0};
    for (int k = 0; k < 3; ++k) od.data[1][k] = 1.0 * m.rows[1][k];
    for (int k = 0; k < 3; ++k) od.data[2][k] = 3.5 * m.rows[1][k];
    const StainChannels ch = deconvolve(od, m);
    CHECK(ch.dab_display.data[0] == 255);
    CHECK(ch.dab_display.data[1] == 26);  // round(255/10)
    CHECK(ch.dab_display.data[2] == 0);   // saturated

    // Antitone in c_dab.
    CHECK(ch.dab_display.data[0] > ch.dab_display.data[1]);
    CHECK(ch.dab_display.data[1] > ch.dab_display.data[2]);

    const RgbImage tinted = dab_display_rgb(ch);
    CHECK(tinted.data[0] == Rgb8{255, 255, 255});
    for (int k = 0; k < 3; ++k) {
        const double expect = 255.0 * std::pow(10.0, -1.0 * m.rows[1][k]);
        const std::uint8_t got = k == 0 ? tinted.data[1].r : (k == 1 ? tinted.data[1].g : tinted.data[1].b);
        CHECK((int)got == (int)std::lround(expect));
    }
}
