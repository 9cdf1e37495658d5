#pragma once

#include <algorithm>

#include "moseg/error.hpp"

namespace moseg {

// Pixel-to-normalized coordinate mapping: origin at the image center,
// divided by s_norm = max(W, H) / 2. Keeps regression inputs O(1) at any
// resolution; flow is divided by the same factor before fitting.
struct CoordGrid {
    int width = 0;
    int height = 0;
    double s_norm = 1.0;

    double x_of(int col) const { return (col - (width - 1) * 0.5) / s_norm; }
    double y_of(int row) const { return (row - (height - 1) * 0.5) / s_norm; }

    // Inverse mapping, exact up to roundoff.
    double col_of(double x) const { return x * s_norm + (width - 1) * 0.5; }
    double row_of(double y) const { return y * s_norm + (height - 1) * 0.5; }
};

inline CoordGrid normalize_coords(int width, int height) {
    if (width < 1 || height < 1)
        throw InvalidArgument("image dimensions must be positive");
    CoordGrid g;
    g.width = width;
    g.height = height;
    g.s_norm = std::max(width, height) * 0.5;
    return g;
}

}  // namespace moseg
