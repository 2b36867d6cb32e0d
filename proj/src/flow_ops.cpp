#include "amflow/flow_ops.hpp"

#include <cmath>

#include "amflow/parallel.hpp"

namespace amflow {

Raster<float> endpoint_error(const FlowField& pred, const FlowField& gt) {
    if (!pred.same_size(gt)) throw ShapeError("endpoint_error: dimension mismatch");

    Raster<float> err(pred.width, pred.height, 0.0f);
    const std::int64_t n = static_cast<std::int64_t>(pred.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (std::int64_t i = 0; i < n; ++i) {
        const double du = static_cast<double>(pred.u[i]) - gt.u[i];
        const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
        err[static_cast<std::size_t>(i)] = static_cast<float>(std::sqrt(du * du + dv * dv));
    }
    return err;
}

Mask warp_mask_forward(const Mask& mask, const FlowField& flow) {
    if (!mask.same_size(flow.width, flow.height))
        throw ShapeError("warp_mask_forward: dimension mismatch");

    Mask out(mask.width(), mask.height(), 0);
    // Serial: concurrent splats may share a destination pixel.
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

} // namespace amflow
