#pragma once

#include <cstdint>
#include <vector>

#include "moseg/error.hpp"

namespace moseg {

// Row-major single-channel raster.
template <typename T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    T& at(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
    const T& at(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }
    size_t size() const { return data.size(); }
};

// Dense per-pixel displacement between a frame and its successor,
// stored as interleaved (u, v) float32 in pixels/frame.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // length = width * height * 2

    FlowField() = default;
    FlowField(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 2, 0.0f) {}

    float& u(int row, int col) { return data[(static_cast<size_t>(row) * width + col) * 2]; }
    float& v(int row, int col) { return data[(static_cast<size_t>(row) * width + col) * 2 + 1]; }
    float u(int row, int col) const { return data[(static_cast<size_t>(row) * width + col) * 2]; }
    float v(int row, int col) const { return data[(static_cast<size_t>(row) * width + col) * 2 + 1]; }
};

enum class DepthConvention { Depth, InverseDepth };

// Per-pixel positive depth (or inverse depth, per convention).
struct DepthMap {
    Grid<float> values;
    DepthConvention convention = DepthConvention::Depth;
    int clamped_count = 0;  // nonpositive inputs clamped on load

    int width() const { return values.width; }
    int height() const { return values.height; }
};

// Relative inverse depth q = 1/z, scale-ambiguous, clamped positive.
struct InverseDepthMap {
    Grid<float> q;

    int width() const { return q.width; }
    int height() const { return q.height; }
};

inline constexpr double kInverseDepthMin = 1e-6;
inline constexpr double kInverseDepthMax = 1e6;
inline constexpr double kDepthFloor = 1e-6;  // 1 / kInverseDepthMax

// Per-frame instance labels; 0 = unassigned.
struct MaskFrame {
    Grid<uint16_t> labels;

    int width() const { return labels.width; }
    int height() const { return labels.height; }
};

// q = 1/z elementwise (identity for inverse-depth inputs), clamped to
// [kInverseDepthMin, kInverseDepthMax].
InverseDepthMap to_inverse_depth(const DepthMap& d);

}  // namespace moseg
