#pragma once

#include <array>

#include "epiquant/types.hpp"

namespace epiquant {

// Per-pixel optical density, od = -log10(max(I,1)/255) per channel.
struct OdImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<double, 3>> data;

    OdImage() = default;
    OdImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}
};

// Rows are unit-norm stain OD vectors: hematoxylin, DAB, residual.
struct StainMatrix {
    double rows[3][3] = {};

    double det() const;
    // Normalizes each row to unit Euclidean norm. Throws DegenerateInputError
    // on a zero row.
    static StainMatrix from_rows(const std::array<double, 3>& hema,
                                 const std::array<double, 3>& dab,
                                 const std::array<double, 3>& residual);
    // Residual derived as the unit cross product of the first two rows.
    static StainMatrix from_two_stains(const std::array<double, 3>& hema,
                                       const std::array<double, 3>& dab);
};

// The ImageJ Color Deconvolution 2 plug-in H-DAB basis.
StainMatrix hdab_stain_matrix();

// Raw per-stain concentrations (possibly negative; solver output kept exact)
// plus 8-bit display renderings, display = clamp(round(255 * 10^-c)).
struct StainChannels {
    int width = 0;
    int height = 0;
    StainMatrix matrix;
    std::vector<double> c_hema;
    std::vector<double> c_dab;
    std::vector<double> c_res;
    GrayImage hema_display;
    GrayImage dab_display;
    GrayImage res_display;
};

OdImage od_from_rgb(const RgbImage& img);

// Solves M^T c = od per pixel. Throws SingularMatrixError when |det| <= 1e-6.
StainChannels deconvolve(const OdImage& od, const StainMatrix& m);

// Tinted rendering of the DAB channel, I_k = round(255 * 10^(-c * m_dab,k)).
RgbImage dab_display_rgb(const StainChannels& ch);

}  // namespace epiquant
