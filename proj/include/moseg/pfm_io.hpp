#pragma once

#include <filesystem>

#include "moseg/grid.hpp"

namespace moseg {

// Grayscale PFM ("Pf"): header lines magic / "width height" / scale,
// then float32 rows stored bottom-to-top. Negative scale = little-endian.
// The scale magnitude is not applied to values; transport is bit-exact.

Grid<float> read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Grid<float>& grid);

}  // namespace moseg
