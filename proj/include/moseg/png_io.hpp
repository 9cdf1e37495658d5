#pragma once

#include <filesystem>

#include "moseg/grid.hpp"

namespace moseg {

// 16-bit single-channel PNG, used for track-ID masks and optionally depth.
Grid<uint16_t> read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const Grid<uint16_t>& grid);

// 8-bit RGB PNG for visualization output. Pixels are interleaved r,g,b.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}

    void set(int row, int col, uint8_t r, uint8_t g, uint8_t b) {
        uint8_t* p = &data[(static_cast<size_t>(row) * width + col) * 3];
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

void write_png_rgb8(const std::filesystem::path& path, const RgbImage& image);

}  // namespace moseg
