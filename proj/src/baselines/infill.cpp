#include "amflow/baselines/infill.hpp"

#include <algorithm>
#include <limits>

#include "amflow/parallel.hpp"

namespace amflow::baselines {

void InfillInput::validate() const {
    instances.validate();
    if (!instances.instances.empty()) {
        if (instances.width() != modal.width || instances.height() != modal.height)
            throw ShapeError("infill: instance masks do not match the modal flow");
    }
    if (background && !background->same_size(modal))
        throw ShapeError("infill: background flow does not match the modal flow");
    for (const Instance& inst : instances.instances) {
        auto it = occlusion.levels.find(inst.id);
        if (it == occlusion.levels.end())
            throw FormatError("infill: no occlusion level for instance " +
                              std::to_string(inst.id));
        if (it->second < 1)
            throw FormatError("infill: object levels must be >= 1");
    }
}

std::vector<std::int64_t> nearest_visible_sites(const Mask& visible, const Mask& query) {
    if (!visible.same_size(query))
        throw ShapeError("nearest_visible_sites: dimension mismatch");
    const int w = visible.width(), h = visible.height();

    // Pass 1, per column: nearest visible row in the same column
    // (ties toward the smaller row).
    std::vector<std::int32_t> col_site(visible.size(), -1);
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (int x = 0; x < w; ++x) {
        int prev = -1;
        for (int y = 0; y < h; ++y) {
            if (visible.at(x, y)) prev = y;
            col_site[static_cast<std::size_t>(y) * w + x] = prev;
        }
        int next = -1;
        for (int y = h - 1; y >= 0; --y) {
            if (visible.at(x, y)) next = y;
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const int up = col_site[i];
            // Keep the previous (smaller-row) site on distance ties.
            if (up < 0 || (next >= 0 && next - y < y - up)) col_site[i] = next;
        }
    }

    // Pass 2, per row: minimize column distance^2 plus horizontal
    // distance^2 over all columns; lexicographic (d^2, row, col) ties.
    std::vector<std::int64_t> nearest(visible.size(), -1);
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (int y = 0; y < h; ++y) {
        const std::size_t row_base = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            if (!query.at(x, y)) continue;
            std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
            int best_row = -1, best_col = -1;
            for (int sx = 0; sx < w; ++sx) {
                const int sy = col_site[row_base + sx];
                if (sy < 0) continue;
                const std::int64_t dx = sx - x;
                const std::int64_t dy = sy - y;
                const std::int64_t d2 = dx * dx + dy * dy;
                if (d2 < best_d2 || (d2 == best_d2 && (sy < best_row ||
                                                       (sy == best_row && sx < best_col)))) {
                    best_d2 = d2;
                    best_row = sy;
                    best_col = sx;
                }
            }
            if (best_row >= 0)
                nearest[row_base + x] = static_cast<std::int64_t>(best_row) * w + best_col;
        }
    }
    return nearest;
}

namespace {

enum class FillRule { kNearBoundary, kMean, kZero };

LayeredFlowStack assemble(const InfillInput& input, FillRule rule) {
    input.validate();
    const int w = input.modal.width, h = input.modal.height;
    const FlowField& background = input.background_or_modal();

    int num_levels = 1;
    for (const Instance& inst : input.instances.instances)
        if (count_set(inst.amodal) > 0)
            num_levels = std::max(num_levels, input.occlusion.levels.at(inst.id) + 1);

    LayeredFlowStack stack;
    stack.levels.assign(num_levels, LevelField(w, h));
    stack.levels[0].mask = Mask(w, h, 1);
    if (rule != FillRule::kZero) stack.levels[0].flow = background;

    // Ascending id order keeps overlapping same-level writes deterministic.
    std::vector<const Instance*> order;
    for (const Instance& inst : input.instances.instances) order.push_back(&inst);
    std::sort(order.begin(), order.end(),
              [](const Instance* a, const Instance* b) { return a->id < b->id; });

    for (const Instance* inst : order) {
        if (count_set(inst->amodal) == 0) continue;
        LevelField& lf = stack.levels[input.occlusion.levels.at(inst->id)];

        for (std::size_t p = 0; p < inst->amodal.size(); ++p)
            if (inst->amodal[p]) lf.mask[p] = 1;
        if (rule == FillRule::kZero) continue;

        const std::uint64_t visible_count = count_set(inst->visible);

        // Occluded region: amodal minus visible.
        Mask occluded(w, h, 0);
        for (std::size_t p = 0; p < inst->amodal.size(); ++p)
            occluded[p] = static_cast<std::uint8_t>(inst->amodal[p] && !inst->visible[p]);

        if (visible_count == 0) {
            // Fully occluded: background motion is the zero-knowledge fill.
            for (std::size_t p = 0; p < occluded.size(); ++p) {
                if (!occluded[p]) continue;
                lf.flow.u[p] = background.u[p];
                lf.flow.v[p] = background.v[p];
            }
            continue;
        }

        if (rule == FillRule::kNearBoundary) {
            const std::vector<std::int64_t> sites = nearest_visible_sites(inst->visible, occluded);
            for (std::size_t p = 0; p < occluded.size(); ++p) {
                if (!occluded[p]) continue;
                const std::int64_t s = sites[p];
                lf.flow.u[p] = input.modal.u[static_cast<std::size_t>(s)];
                lf.flow.v[p] = input.modal.v[static_cast<std::size_t>(s)];
            }
        } else { // kMean
            double sum_u = 0.0, sum_v = 0.0;
            for (std::size_t p = 0; p < inst->visible.size(); ++p) {
                if (!inst->visible[p]) continue;
                sum_u += input.modal.u[p];
                sum_v += input.modal.v[p];
            }
            const float mean_u = static_cast<float>(sum_u / static_cast<double>(visible_count));
            const float mean_v = static_cast<float>(sum_v / static_cast<double>(visible_count));
            for (std::size_t p = 0; p < occluded.size(); ++p) {
                if (!occluded[p]) continue;
                lf.flow.u[p] = mean_u;
                lf.flow.v[p] = mean_v;
            }
        }

        // Visible pixels always carry the modal flow verbatim.
        for (std::size_t p = 0; p < inst->visible.size(); ++p) {
            if (!inst->visible[p]) continue;
            lf.flow.u[p] = input.modal.u[p];
            lf.flow.v[p] = input.modal.v[p];
        }
    }
    return stack;
}

} // namespace

LayeredFlowStack infill_near_boundary(const InfillInput& input) {
    return assemble(input, FillRule::kNearBoundary);
}

LayeredFlowStack infill_mean(const InfillInput& input) {
    return assemble(input, FillRule::kMean);
}

LayeredFlowStack zero_baseline(const InfillInput& input) {
    return assemble(input, FillRule::kZero);
}

} // namespace amflow::baselines
