#pragma once

namespace amflow::par {

// Caps the worker count of every OpenMP kernel in the library.
// 0 restores the hardware default. Thread count never changes results:
// kernels either write disjoint per-pixel slots or reduce integer counts.
void set_max_threads(int n);

int max_threads();

} // namespace amflow::par
