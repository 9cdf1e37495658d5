#pragma once

#include "moseg/grid.hpp"
#include "moseg/png_io.hpp"

namespace moseg {

// Color for a group label: fixed golden-angle hue palette, label 0 dim gray.
void label_color(uint16_t label, uint8_t& r, uint8_t& g, uint8_t& b);

// Color-coded group overlay of a label mask.
RgbImage render_overlay(const MaskFrame& mask);

// Standard flow color wheel: hue = direction, saturation = magnitude
// relative to the field's maximum.
RgbImage render_flow_wheel(const FlowField& flow);

}  // namespace moseg
