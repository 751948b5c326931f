#include "epiquant/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include "epiquant/errors.hpp"

namespace epiquant {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw DecodeError("cannot open file: " + path);
    return f;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

RgbImage load_jpeg(std::FILE* f, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeError("JPEG decode failed: " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    RgbImage img(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    std::vector<std::uint8_t> row(static_cast<std::size_t>(cinfo.output_width) * 3);
    JSAMPROW rows[1] = {row.data()};
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = static_cast<int>(cinfo.output_scanline);
        jpeg_read_scanlines(&cinfo, rows, 1);
        for (int x = 0; x < img.width; ++x)
            img.at(x, y) = {row[3 * x], row[3 * x + 1], row[3 * x + 2]};
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

RgbImage load_png_file(std::FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DecodeError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DecodeError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("PNG decode failed: " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    const int ct = png_get_color_type(png, info);
    if (ct == PNG_COLOR_TYPE_GRAY || ct == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    RgbImage img(static_cast<int>(png_get_image_width(png, info)),
                 static_cast<int>(png_get_image_height(png, info)));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> row(rowbytes);
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < img.width; ++x)
            img.at(x, y) = {row[3 * x], row[3 * x + 1], row[3 * x + 2]};
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png_rows(const std::string& path, int width, int height, int color_type, int bit_depth,
                    const std::vector<std::vector<std::uint8_t>>& rows) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encode failed: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows) png_write_row(png, const_cast<std::uint8_t*>(row.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage load_image(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    std::uint8_t sig[8] = {};
    const std::size_t got = std::fread(sig, 1, sizeof(sig), f.get());
    std::rewind(f.get());
    if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) return load_png_file(f.get(), path);
    if (got >= 2 && sig[0] == 0xFF && sig[1] == 0xD8) return load_jpeg(f.get(), path);
    throw DecodeError("not a PNG or JPEG file: " + path);
}

void save_png(const std::string& path, const RgbImage& img) {
    std::vector<std::vector<std::uint8_t>> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y].resize(static_cast<std::size_t>(img.width) * 3);
        for (int x = 0; x < img.width; ++x) {
            const Rgb8& p = img.at(x, y);
            rows[y][3 * x] = p.r;
            rows[y][3 * x + 1] = p.g;
            rows[y][3 * x + 2] = p.b;
        }
    }
    write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, rows);
}

void save_png(const std::string& path, const GrayImage& img) {
    std::vector<std::vector<std::uint8_t>> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y].assign(img.data.begin() + static_cast<std::size_t>(y) * img.width,
                       img.data.begin() + static_cast<std::size_t>(y + 1) * img.width);
    write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, rows);
}

void save_png(const std::string& path, const BinaryMask& mask) {
    std::vector<std::vector<std::uint8_t>> rows(mask.height);
    const std::size_t rowbytes = (static_cast<std::size_t>(mask.width) + 7) / 8;
    for (int y = 0; y < mask.height; ++y) {
        rows[y].assign(rowbytes, 0);
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) rows[y][x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    }
    write_png_rows(path, mask.width, mask.height, PNG_COLOR_TYPE_GRAY, 1, rows);
}

}  // namespace epiquant
