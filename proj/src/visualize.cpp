#include "moseg/visualize.hpp"

#include <algorithm>
#include <cmath>

namespace moseg {

namespace {

void hsv_to_rgb(double h, double s, double v, uint8_t& r, uint8_t& g, uint8_t& b) {
    h = h - std::floor(h);
    const double hh = h * 6.0;
    const int sector = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double rr = 0, gg = 0, bb = 0;
    switch (sector) {
        case 0: rr = v; gg = t; bb = p; break;
        case 1: rr = q; gg = v; bb = p; break;
        case 2: rr = p; gg = v; bb = t; break;
        case 3: rr = p; gg = q; bb = v; break;
        case 4: rr = t; gg = p; bb = v; break;
        default: rr = v; gg = p; bb = q; break;
    }
    r = static_cast<uint8_t>(std::lround(rr * 255.0));
    g = static_cast<uint8_t>(std::lround(gg * 255.0));
    b = static_cast<uint8_t>(std::lround(bb * 255.0));
}

constexpr double kGoldenAngle = 0.38196601125010515;  // 1 - 1/phi

}  // namespace

void label_color(uint16_t label, uint8_t& r, uint8_t& g, uint8_t& b) {
    if (label == 0) {
        r = g = b = 40;
        return;
    }
    hsv_to_rgb((label - 1) * kGoldenAngle, 0.85, 0.95, r, g, b);
}

RgbImage render_overlay(const MaskFrame& mask) {
    RgbImage img(mask.width(), mask.height());
    for (int row = 0; row < mask.height(); ++row) {
        for (int col = 0; col < mask.width(); ++col) {
            uint8_t r, g, b;
            label_color(mask.labels.at(row, col), r, g, b);
            img.set(row, col, r, g, b);
        }
    }
    return img;
}

RgbImage render_flow_wheel(const FlowField& flow) {
    double max_mag = 0.0;
    for (int row = 0; row < flow.height; ++row)
        for (int col = 0; col < flow.width; ++col)
            max_mag = std::max(max_mag, std::hypot(static_cast<double>(flow.u(row, col)),
                                                   static_cast<double>(flow.v(row, col))));
    if (max_mag <= 0.0) max_mag = 1.0;

    RgbImage img(flow.width, flow.height);
    for (int row = 0; row < flow.height; ++row) {
        for (int col = 0; col < flow.width; ++col) {
            const double u = flow.u(row, col), v = flow.v(row, col);
            const double angle = std::atan2(-v, -u) / (2.0 * M_PI) + 0.5;
            const double mag = std::hypot(u, v) / max_mag;
            uint8_t r, g, b;
            hsv_to_rgb(angle, std::clamp(mag, 0.0, 1.0), 1.0, r, g, b);
            img.set(row, col, r, g, b);
        }
    }
    return img;
}

}  // namespace moseg
