#pragma once

#include <filesystem>

#include "amflow/stack.hpp"

namespace amflow {

// Two interchangeable stack layouts:
//  - directory: level_%d.flo + level_%d_mask.png for levels 0..N-1
//    (level-0 mask may be absent on read; it then defaults to all-ones)
//  - single ".amfl" container: magic "AMFL", u32 version=1, u32 width,
//    u32 height, u8 num_levels, then per level width*height mask bytes
//    (0/1) followed by width*height*2 float32 LE flow.
// Paths ending in ".amfl" select the container; anything else is treated
// as a directory (created on write).
LayeredFlowStack read_stack(const std::filesystem::path& dir_or_file);

void write_stack(const LayeredFlowStack& stack, const std::filesystem::path& dir_or_file);

} // namespace amflow
