#include "moseg/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace moseg {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_to_exception(png_structp, png_const_charp msg) {
    throw MalformedFile(std::string("libpng: ") + (msg ? msg : "unknown error"));
}

void png_warning_swallow(png_structp, png_const_charp) {}

}  // namespace

Grid<uint16_t> read_png16(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw MissingFile("cannot open PNG file " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_to_exception, png_warning_swallow);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY)
        throw MalformedFile("expected grayscale PNG: " + path.string());

    if (bit_depth < 16) png_set_expand_gray_1_2_4_to_8(png);
    // Promote 8-bit inputs so callers always see 16-bit values.
    png_read_update_info(png, info);

    Grid<uint16_t> grid(static_cast<int>(w), static_cast<int>(h));
    const bool wide = png_get_bit_depth(png, info) == 16;
    std::vector<uint8_t> row(static_cast<size_t>(w) * (wide ? 2 : 1));
    for (png_uint_32 r = 0; r < h; ++r) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 c = 0; c < w; ++c) {
            grid.at(static_cast<int>(r), static_cast<int>(c)) =
                wide ? static_cast<uint16_t>((row[c * 2] << 8) | row[c * 2 + 1])
                     : static_cast<uint16_t>(row[c]);
        }
    }
    png_read_end(png, nullptr);
    return grid;
}

void write_png16(const std::filesystem::path& path, const Grid<uint16_t>& grid) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoFailure("cannot write PNG file " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_to_exception, png_warning_swallow);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(grid.width),
                 static_cast<png_uint_32>(grid.height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(grid.width) * 2);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const uint16_t v = grid.at(r, c);
            row[static_cast<size_t>(c) * 2] = static_cast<uint8_t>(v >> 8);
            row[static_cast<size_t>(c) * 2 + 1] = static_cast<uint8_t>(v & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
}

void write_png_rgb8(const std::filesystem::path& path, const RgbImage& image) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoFailure("cannot write PNG file " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_to_exception, png_warning_swallow);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < image.height; ++r)
        png_write_row(png, const_cast<png_bytep>(&image.data[static_cast<size_t>(r) * image.width * 3]));
    png_write_end(png, nullptr);
}

}  // namespace moseg
