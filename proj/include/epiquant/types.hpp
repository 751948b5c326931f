#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace epiquant {

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

// Dense row-major 8-bit RGB raster, the pipeline's working currency.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb8> data;

    RgbImage() = default;
    RgbImage(int w, int h, Rgb8 fill = {0, 0, 0})
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    Rgb8& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const Rgb8& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }
};

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }
};

struct LabPixel {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Floating CIELAB raster (D65), carrier for the Reinhard statistics.
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<LabPixel> data;

    LabImage() = default;
    LabImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}

    LabPixel& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const LabPixel& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Per-pixel tissue indicator aligned to an image; 1 = tissue.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool get(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    std::size_t count_true() const {
        std::size_t n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }
    bool any() const {
        for (auto v : data)
            if (v) return true;
        return false;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

}  // namespace epiquant
