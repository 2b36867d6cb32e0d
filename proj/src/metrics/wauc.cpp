#include "amflow/metrics/wauc.hpp"

#include <cmath>

#include "amflow/parallel.hpp"

namespace amflow::metrics {

namespace {

// suffix[m] = sum of threshold weights w_m..w_100, in fixed order;
// suffix[1] is the full weight sum used as the WAUC denominator.
const std::array<double, WaucThresholds::kCount + 2>& weight_suffix_sums() {
    static const auto table = [] {
        std::array<double, WaucThresholds::kCount + 2> s{};
        s[WaucThresholds::kCount + 1] = 0.0;
        for (int i = WaucThresholds::kCount; i >= 1; --i)
            s[i] = s[i + 1] + WaucThresholds::weight(i);
        s[0] = 0.0; // bin 0: no threshold passed
        return s;
    }();
    return table;
}

} // namespace

int first_passing_threshold(double e) {
    if (!(e <= WaucThresholds::delta(WaucThresholds::kCount))) return 0;
    int m = static_cast<int>(std::ceil(e * 20.0));
    if (m < 1) m = 1;
    if (m > WaucThresholds::kCount) m = WaucThresholds::kCount;
    // Guard the ceil against rounding at exact threshold values.
    while (m > 1 && e <= WaucThresholds::delta(m - 1)) --m;
    while (e > WaucThresholds::delta(m)) {
        if (++m > WaucThresholds::kCount) return 0;
    }
    return m;
}

void accumulate_wauc(const FlowField& pred, const FlowField& gt_flow, const Mask& gt_mask,
                     WaucHistogram& hist) {
    if (!pred.same_size(gt_flow) || !gt_mask.same_size(pred.width, pred.height))
        throw ShapeError("wauc: dimension mismatch");

    const std::int64_t n = static_cast<std::int64_t>(pred.size());
    std::array<std::uint64_t, WaucThresholds::kCount + 1> local{};
    auto* bins = local.data();
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) \
    reduction(+ : bins[ : WaucThresholds::kCount + 1])
    for (std::int64_t i = 0; i < n; ++i) {
        if (!gt_mask[static_cast<std::size_t>(i)]) continue;
        const double du = static_cast<double>(pred.u[i]) - gt_flow.u[i];
        const double dv = static_cast<double>(pred.v[i]) - gt_flow.v[i];
        const double e = std::sqrt(du * du + dv * dv);
        ++bins[first_passing_threshold(e)];
    }
    for (std::size_t i = 0; i < local.size(); ++i) hist.bins[i] += local[i];
}

void accumulate_wauc_missing(std::uint64_t count, WaucHistogram& hist) {
    hist.bins[0] += count;
}

WaucResult wauc_from_histogram(const WaucHistogram& hist) {
    WaucResult r;
    r.pixels = hist.total();
    if (r.pixels == 0) return r;

    const auto& suffix = weight_suffix_sums();
    double numerator = 0.0;
    for (int m = 1; m <= WaucThresholds::kCount; ++m)
        numerator += static_cast<double>(hist.bins[m]) * suffix[m];
    r.wauc = numerator / (static_cast<double>(r.pixels) * suffix[1]);
    r.present = true;
    return r;
}

WaucResult wauc_level(const FlowField& pred, const FlowField& gt_flow, const Mask& gt_mask) {
    WaucHistogram hist;
    accumulate_wauc(pred, gt_flow, gt_mask, hist);
    return wauc_from_histogram(hist);
}

} // namespace amflow::metrics
