#include "amflow/ref/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "amflow/metrics/statistics.hpp"

namespace amflow::ref {

Raster<float> endpoint_error(const FlowField& pred, const FlowField& gt) {
    if (!pred.same_size(gt)) throw ShapeError("ref endpoint_error: dimension mismatch");
    Raster<float> err(pred.width, pred.height, 0.0f);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double du = static_cast<double>(pred.u[i]) - gt.u[i];
        const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
        err[i] = static_cast<float>(std::sqrt(du * du + dv * dv));
    }
    return err;
}

double wauc(const FlowField& pred, const FlowField& gt_flow, const Mask& gt_mask) {
    if (!pred.same_size(gt_flow) || !gt_mask.same_size(pred.width, pred.height))
        throw ShapeError("ref wauc: dimension mismatch");

    std::uint64_t c = 0;
    for (std::size_t i = 0; i < gt_mask.size(); ++i) c += gt_mask[i];
    if (c == 0) return 0.0;

    double numerator = 0.0;
    double weight_sum = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double delta = i / 20.0;
        const double w = 1.0 - (i - 1) / 100.0;
        weight_sum += w;
        std::uint64_t inliers = 0;
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (!gt_mask[j]) continue;
            const double du = static_cast<double>(pred.u[j]) - gt_flow.u[j];
            const double dv = static_cast<double>(pred.v[j]) - gt_flow.v[j];
            if (std::sqrt(du * du + dv * dv) <= delta) ++inliers;
        }
        numerator += w * static_cast<double>(inliers);
    }
    return numerator / (static_cast<double>(c) * weight_sum);
}

std::array<std::uint64_t, 3> confusion(const Mask& pred_mask, const Mask& gt_mask) {
    if (!pred_mask.same_size(gt_mask)) throw ShapeError("ref confusion: dimension mismatch");
    std::array<std::uint64_t, 3> counts{0, 0, 0};
    for (std::size_t i = 0; i < pred_mask.size(); ++i) {
        const bool p = pred_mask[i] != 0;
        const bool g = gt_mask[i] != 0;
        if (p && g) ++counts[0];
        if (p && !g) ++counts[1];
        if (!p && g) ++counts[2];
    }
    return counts;
}

Mask warp_mask_forward(const Mask& mask, const FlowField& flow) {
    if (!mask.same_size(flow.width, flow.height))
        throw ShapeError("ref warp: dimension mismatch");
    Mask out(mask.width(), mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const std::size_t i = flow.index(x, y);
            const long tx = std::lround(static_cast<double>(x) + flow.u[i]);
            const long ty = std::lround(static_cast<double>(y) + flow.v[i]);
            if (tx < 0 || ty < 0 || tx >= mask.width() || ty >= mask.height()) continue;
            out.at(static_cast<int>(tx), static_cast<int>(ty)) = 1;
        }
    }
    return out;
}

std::vector<std::int64_t> nearest_visible(const Mask& visible, const Mask& query) {
    if (!visible.same_size(query)) throw ShapeError("ref nearest_visible: dimension mismatch");
    const int w = visible.width(), h = visible.height();
    std::vector<std::int64_t> nearest(visible.size(), -1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!query.at(x, y)) continue;
            std::int64_t best = -1;
            std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
            for (int sy = 0; sy < h; ++sy) {
                for (int sx = 0; sx < w; ++sx) {
                    if (!visible.at(sx, sy)) continue;
                    const std::int64_t dx = sx - x, dy = sy - y;
                    const std::int64_t d2 = dx * dx + dy * dy;
                    // Scan order is (row, column) ascending, so strict
                    // improvement implements the tie rule.
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = static_cast<std::int64_t>(sy) * w + sx;
                    }
                }
            }
            nearest[static_cast<std::size_t>(y) * w + x] = best;
        }
    }
    return nearest;
}

double hungarian_brute_force(const std::vector<std::vector<double>>& score) {
    const int rows = static_cast<int>(score.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(score[0].size());
    if (rows == 0 || cols == 0) return 0.0;

    double best = -std::numeric_limits<double>::infinity();
    std::vector<bool> used(cols, false);

    std::function<void(int, int, double)> recurse = [&](int row, int assigned, double total) {
        const int remaining_rows = rows - row;
        const int needed = std::min(rows, cols) - assigned;
        if (needed == 0 || remaining_rows == 0) {
            if (needed == 0) best = std::max(best, total);
            return;
        }
        if (remaining_rows > needed) recurse(row + 1, assigned, total); // leave row unmatched
        for (int c = 0; c < cols; ++c) {
            if (used[c]) continue;
            used[c] = true;
            recurse(row + 1, assigned + 1, total + score[row][c]);
            used[c] = false;
        }
    };
    recurse(0, 0, 0.0);
    return best;
}

std::map<int, int> longest_path_levels(const std::vector<int>& ids,
                                       const std::vector<std::pair<int, int>>& in_front) {
    std::map<int, std::vector<int>> occluders; // behind -> fronts
    for (const auto& [f, b] : in_front) occluders[b].push_back(f);

    std::map<int, int> levels;
    std::function<int(int)> level_of = [&](int id) -> int {
        auto it = levels.find(id);
        if (it != levels.end()) return it->second;
        int lvl = 1;
        for (int f : occluders[id]) lvl = std::max(lvl, level_of(f) + 1);
        levels[id] = lvl;
        return lvl;
    };
    for (int id : ids) level_of(id);
    return levels;
}

std::vector<std::uint64_t> direction_histogram(const FlowField& flow) {
    using metrics::FlowStatistics;
    std::vector<std::uint64_t> bins(FlowStatistics::kDirectionBins, 0);
    for (std::size_t i = 0; i < flow.size(); ++i) {
        const double u = flow.u[i], v = flow.v[i];
        if (std::sqrt(u * u + v * v) < FlowStatistics::kSpeedCutoff) continue;
        double angle = std::atan2(v, u);
        if (angle >= M_PI) angle = -M_PI;
        int bin = static_cast<int>(
            std::floor((angle + M_PI) / (2.0 * M_PI) * FlowStatistics::kDirectionBins));
        bin = std::clamp(bin, 0, FlowStatistics::kDirectionBins - 1);
        ++bins[static_cast<std::size_t>(bin)];
    }
    return bins;
}

} // namespace amflow::ref
