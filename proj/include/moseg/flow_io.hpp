#pragma once

#include <filesystem>

#include "moseg/grid.hpp"

namespace moseg {

// Middlebury .flo container: float32 magic 202021.25, int32 width,
// int32 height, then interleaved float32 (u, v) row-major, little-endian.

FlowField read_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);

}  // namespace moseg
