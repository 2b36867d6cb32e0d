#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "amflow/flow_field.hpp"

namespace amflow::metrics {

// Flow-direction and horizontal-gradient histograms. Counts are raw;
// log10(count + 1) is applied at presentation time only.
struct FlowStatistics {
    static constexpr int kDirectionBins = 36; // uniform over [-pi, pi)
    static constexpr int kGradientBins = 101; // uniform over [-10, 10] px, clipped
    static constexpr double kSpeedCutoff = 1e-6;

    std::array<std::uint64_t, kDirectionBins> direction{};
    std::array<std::uint64_t, kGradientBins> du_dx{};

    std::uint64_t direction_total() const;
    std::uint64_t du_dx_total() const;

    FlowStatistics& operator+=(const FlowStatistics& o);

    static double direction_bin_lo(int bin);
    static double direction_bin_hi(int bin);
    static double gradient_bin_lo(int bin);
    static double gradient_bin_hi(int bin);

    // CSV: histogram,bin,lo,hi,count,log10_count_plus_1 (header + 137 rows).
    void write_csv(std::ostream& os) const;
};

// Direction histogram over atan2(v, u), excluding near-zero displacements;
// gradient histogram over the horizontal forward difference of u.
FlowStatistics flow_statistics(const FlowField& flow);

} // namespace amflow::metrics
