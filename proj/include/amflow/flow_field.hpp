#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "amflow/errors.hpp"

namespace amflow {

// Dense two-channel displacement raster. u = horizontal, v = vertical,
// both in pixels, row-major, one float per pixel per channel.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u;
    std::vector<float> v;

    FlowField() = default;

    FlowField(int w, int h) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw ShapeError("flow field dimensions must be positive");
        u.assign(static_cast<std::size_t>(w) * h, 0.0f);
        v.assign(static_cast<std::size_t>(w) * h, 0.0f);
    }

    std::size_t size() const { return u.size(); }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    bool same_size(const FlowField& o) const { return width == o.width && height == o.height; }

    bool all_finite() const {
        for (std::size_t i = 0; i < u.size(); ++i)
            if (!std::isfinite(u[i]) || !std::isfinite(v[i])) return false;
        return true;
    }

    bool operator==(const FlowField&) const = default;
};

} // namespace amflow
