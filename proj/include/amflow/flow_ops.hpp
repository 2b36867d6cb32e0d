#pragma once

#include "amflow/flow_field.hpp"
#include "amflow/raster.hpp"

namespace amflow {

// Per-pixel Euclidean distance between displacement vectors.
Raster<float> endpoint_error(const FlowField& pred, const FlowField& gt);

// Forward splatting: every set pixel p lands on round(p + flow(p));
// destinations outside the frame are dropped. No hole filling.
Mask warp_mask_forward(const Mask& mask, const FlowField& flow);

} // namespace amflow
