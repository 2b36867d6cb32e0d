#include "amflow/parallel.hpp"

#include <atomic>

#include <omp.h>

namespace amflow::par {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n > 0 ? n : 0); }

int max_threads() {
    const int capped = g_max_threads.load();
    const int hw = omp_get_max_threads();
    if (capped <= 0) return hw;
    return capped < hw ? capped : hw;
}

} // namespace amflow::par
