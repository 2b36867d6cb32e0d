#include "amflow/colorize.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "amflow/parallel.hpp"

namespace amflow {

namespace {

constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
constexpr int kWheelSize = kRY + kYG + kGC + kCB + kBM + kMR; // 55

std::array<std::array<double, 3>, kWheelSize> make_color_wheel() {
    std::array<std::array<double, 3>, kWheelSize> wheel{};
    int col = 0;
    for (int i = 0; i < kRY; ++i, ++col) wheel[col] = {255.0, 255.0 * i / kRY, 0.0};
    for (int i = 0; i < kYG; ++i, ++col) wheel[col] = {255.0 - 255.0 * i / kYG, 255.0, 0.0};
    for (int i = 0; i < kGC; ++i, ++col) wheel[col] = {0.0, 255.0, 255.0 * i / kGC};
    for (int i = 0; i < kCB; ++i, ++col) wheel[col] = {0.0, 255.0 - 255.0 * i / kCB, 255.0};
    for (int i = 0; i < kBM; ++i, ++col) wheel[col] = {255.0 * i / kBM, 0.0, 255.0};
    for (int i = 0; i < kMR; ++i, ++col) wheel[col] = {255.0, 0.0, 255.0 - 255.0 * i / kMR};
    return wheel;
}

const std::array<std::array<double, 3>, kWheelSize>& color_wheel() {
    static const auto wheel = make_color_wheel();
    return wheel;
}

void pixel_color(double u, double v, double max_radius, std::uint8_t* rgb) {
    const auto& wheel = color_wheel();
    const double rad = std::sqrt(u * u + v * v) / max_radius;
    const double a = std::atan2(-v, -u) / M_PI; // [-1, 1]
    const double fk = (a + 1.0) / 2.0 * (kWheelSize - 1);
    const int k0 = std::min(static_cast<int>(fk), kWheelSize - 1);
    const int k1 = (k0 + 1) % kWheelSize;
    const double f = fk - k0;
    for (int c = 0; c < 3; ++c) {
        double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
        if (rad <= 1.0)
            col = 1.0 - rad * (1.0 - col); // saturate toward white at the origin
        else
            col *= 0.75; // out-of-range magnitude
        rgb[c] = static_cast<std::uint8_t>(std::lround(255.0 * col));
    }
}

double max_magnitude(const FlowField& flow) {
    double best = 0.0;
    const std::int64_t n = static_cast<std::int64_t>(flow.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) reduction(max : best)
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = flow.u[i], v = flow.v[i];
        const double m = std::sqrt(u * u + v * v);
        if (m > best) best = m;
    }
    return best;
}

void colorize_into(const FlowField& flow, double max_radius, const Mask* mask, ColorImage& img) {
    const std::int64_t n = static_cast<std::int64_t>(flow.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (std::int64_t i = 0; i < n; ++i) {
        if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
        pixel_color(flow.u[i], flow.v[i], max_radius, &img.rgb[static_cast<std::size_t>(i) * 3]);
    }
}

} // namespace

ColorImage colorize_flow(const FlowField& flow, double max_radius) {
    if (flow.width <= 0) throw ShapeError("colorize_flow: empty field");
    if (max_radius <= 0.0) max_radius = max_magnitude(flow);
    max_radius = std::max(max_radius, 1e-9);
    ColorImage img(flow.width, flow.height);
    colorize_into(flow, max_radius, nullptr, img);
    return img;
}

ColorImage composite_visualization(const LayeredFlowStack& stack) {
    if (stack.num_levels() < 1 || !stack.consistent())
        throw ShapeError("composite_visualization: invalid stack");

    double max_radius = 0.0;
    for (const LevelField& lf : stack.levels)
        max_radius = std::max(max_radius, max_magnitude(lf.flow));
    max_radius = std::max(max_radius, 1e-9);

    ColorImage img(stack.width(), stack.height());
    colorize_into(stack.levels[0].flow, max_radius, nullptr, img);
    for (int n = 1; n < stack.num_levels(); ++n)
        colorize_into(stack.levels[n].flow, max_radius, &stack.levels[n].mask, img);
    return img;
}

} // namespace amflow
