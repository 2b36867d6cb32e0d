#pragma once

#include "amflow/flow_field.hpp"
#include "amflow/png_io.hpp"
#include "amflow/stack.hpp"

namespace amflow {

// Middlebury flow color coding: hue encodes direction, saturation encodes
// magnitude relative to max_radius, zero displacement renders white.
// max_radius <= 0 normalizes by the field's own maximum magnitude.
ColorImage colorize_flow(const FlowField& flow, double max_radius = 0.0);

// Superimposes the level colorizations in order 0..N-1: starts from the
// background colorization and overwrites masked pixels level by level.
// All levels share one normalization radius.
ColorImage composite_visualization(const LayeredFlowStack& stack);

} // namespace amflow
