#pragma once

#include <filesystem>

#include "amflow/flow_field.hpp"

namespace amflow {

// Middlebury .flo interchange: float32 magic 202021.25 ("PIEH"), int32
// width, int32 height, then height*width interleaved (u,v) float32 pairs,
// row-major. All little-endian.
FlowField read_flo(const std::filesystem::path& path);

void write_flo(const FlowField& field, const std::filesystem::path& path);

} // namespace amflow
