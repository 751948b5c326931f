#pragma once

#include <string>

#include "epiquant/types.hpp"

namespace epiquant {

// Decodes a JPEG or PNG file (sniffed by signature) into 8-bit sRGB.
// Throws DecodeError on unreadable or malformed input.
RgbImage load_image(const std::string& path);

void save_png(const std::string& path, const RgbImage& img);
void save_png(const std::string& path, const GrayImage& img);

// 1-bit grayscale PNG, for mask debugging output.
void save_png(const std::string& path, const BinaryMask& mask);

}  // namespace epiquant
