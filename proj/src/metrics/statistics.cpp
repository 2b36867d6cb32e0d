#include "amflow/metrics/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "amflow/parallel.hpp"

namespace amflow::metrics {

namespace {

constexpr double kGradientLo = -10.0;
constexpr double kGradientHi = 10.0;

int direction_bin(double angle) {
    if (angle >= M_PI) angle = -M_PI; // atan2 returns +pi for (-x, +-0)
    int bin = static_cast<int>(std::floor((angle + M_PI) / (2.0 * M_PI) *
                                          FlowStatistics::kDirectionBins));
    return std::clamp(bin, 0, FlowStatistics::kDirectionBins - 1);
}

int gradient_bin(double d) {
    d = std::clamp(d, kGradientLo, kGradientHi);
    int bin = static_cast<int>(std::floor((d - kGradientLo) / (kGradientHi - kGradientLo) *
                                          FlowStatistics::kGradientBins));
    return std::clamp(bin, 0, FlowStatistics::kGradientBins - 1);
}

} // namespace

std::uint64_t FlowStatistics::direction_total() const {
    std::uint64_t t = 0;
    for (std::uint64_t b : direction) t += b;
    return t;
}

std::uint64_t FlowStatistics::du_dx_total() const {
    std::uint64_t t = 0;
    for (std::uint64_t b : du_dx) t += b;
    return t;
}

FlowStatistics& FlowStatistics::operator+=(const FlowStatistics& o) {
    for (int i = 0; i < kDirectionBins; ++i) direction[i] += o.direction[i];
    for (int i = 0; i < kGradientBins; ++i) du_dx[i] += o.du_dx[i];
    return *this;
}

double FlowStatistics::direction_bin_lo(int bin) {
    return -M_PI + bin * (2.0 * M_PI / kDirectionBins);
}
double FlowStatistics::direction_bin_hi(int bin) { return direction_bin_lo(bin + 1); }
double FlowStatistics::gradient_bin_lo(int bin) {
    return kGradientLo + bin * ((kGradientHi - kGradientLo) / kGradientBins);
}
double FlowStatistics::gradient_bin_hi(int bin) { return gradient_bin_lo(bin + 1); }

FlowStatistics flow_statistics(const FlowField& flow) {
    FlowStatistics stats;

    auto* dir_bins = stats.direction.data();
    const std::int64_t n = static_cast<std::int64_t>(flow.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) \
    reduction(+ : dir_bins[ : FlowStatistics::kDirectionBins])
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = flow.u[i], v = flow.v[i];
        if (std::sqrt(u * u + v * v) < FlowStatistics::kSpeedCutoff) continue;
        ++dir_bins[direction_bin(std::atan2(v, u))];
    }

    auto* grad_bins = stats.du_dx.data();
    const int w = flow.width, h = flow.height;
    if (w >= 2) {
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) \
    reduction(+ : grad_bins[ : FlowStatistics::kGradientBins])
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x + 1 < w; ++x) {
                const std::size_t i = flow.index(x, y);
                const double d = static_cast<double>(flow.u[i + 1]) - flow.u[i];
                ++grad_bins[gradient_bin(d)];
            }
        }
    }
    return stats;
}

void FlowStatistics::write_csv(std::ostream& os) const {
    os << "histogram,bin,lo,hi,count,log10_count_plus_1\n";
    char line[160];
    for (int i = 0; i < kDirectionBins; ++i) {
        std::snprintf(line, sizeof(line), "direction,%d,%.6f,%.6f,%llu,%.6f\n", i,
                      direction_bin_lo(i), direction_bin_hi(i),
                      static_cast<unsigned long long>(direction[i]),
                      std::log10(static_cast<double>(direction[i]) + 1.0));
        os << line;
    }
    for (int i = 0; i < kGradientBins; ++i) {
        std::snprintf(line, sizeof(line), "du_dx,%d,%.6f,%.6f,%llu,%.6f\n", i,
                      gradient_bin_lo(i), gradient_bin_hi(i),
                      static_cast<unsigned long long>(du_dx[i]),
                      std::log10(static_cast<double>(du_dx[i]) + 1.0));
        os << line;
    }
}

} // namespace amflow::metrics
