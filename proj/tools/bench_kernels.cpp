#include <random>

#include <benchmark/benchmark.h>

#include "amflow/baselines/infill.hpp"
#include "amflow/flow_ops.hpp"
#include "amflow/metrics/statistics.hpp"
#include "amflow/metrics/wauc.hpp"
#include "amflow/parallel.hpp"
#include "amflow/ref/reference.hpp"
#include "amflow/synth/generate.hpp"
#include "amflow/synth/render.hpp"

namespace {

using namespace amflow;

constexpr int kW = 1024;
constexpr int kH = 768;

FlowField random_flow(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-8.0f, 8.0f);
    FlowField f(kW, kH);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.u[i] = dist(rng);
        f.v[i] = dist(rng);
    }
    return f;
}

Mask disk_mask(int cx, int cy, int r) {
    Mask m(kW, kH, 0);
    for (int y = 0; y < kH; ++y)
        for (int x = 0; x < kW; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1;
    return m;
}

void bench_endpoint_error_ref(benchmark::State& state) {
    const FlowField a = random_flow(1), b = random_flow(2);
    for (auto _ : state) benchmark::DoNotOptimize(ref::endpoint_error(a, b));
}

void bench_endpoint_error_omp(benchmark::State& state) {
    par::set_max_threads(static_cast<int>(state.range(0)));
    const FlowField a = random_flow(1), b = random_flow(2);
    for (auto _ : state) benchmark::DoNotOptimize(endpoint_error(a, b));
    par::set_max_threads(0);
}

void bench_wauc_ref(benchmark::State& state) {
    const FlowField a = random_flow(1), b = random_flow(2);
    const Mask mask(kW, kH, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ref::wauc(a, b, mask));
}

void bench_wauc_omp(benchmark::State& state) {
    par::set_max_threads(static_cast<int>(state.range(0)));
    const FlowField a = random_flow(1), b = random_flow(2);
    const Mask mask(kW, kH, 1);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::wauc_level(a, b, mask));
    par::set_max_threads(0);
}

void bench_nearest_ref(benchmark::State& state) {
    // Brute force is quadratic; keep the domain small.
    Mask visible(kW, kH, 0), query(kW, kH, 0);
    for (int y = 100; y < 160; ++y)
        for (int x = 100; x < 160; ++x) (x < 130 ? visible : query).at(x, y) = 1;
    for (auto _ : state) benchmark::DoNotOptimize(ref::nearest_visible(visible, query));
}

void bench_nearest_two_pass(benchmark::State& state) {
    par::set_max_threads(static_cast<int>(state.range(0)));
    Mask visible(kW, kH, 0), query(kW, kH, 0);
    for (int y = 100; y < 160; ++y)
        for (int x = 100; x < 160; ++x) (x < 130 ? visible : query).at(x, y) = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(baselines::nearest_visible_sites(visible, query));
    par::set_max_threads(0);
}

void bench_direction_hist_ref(benchmark::State& state) {
    const FlowField a = random_flow(3);
    for (auto _ : state) benchmark::DoNotOptimize(ref::direction_histogram(a));
}

void bench_direction_hist_omp(benchmark::State& state) {
    par::set_max_threads(static_cast<int>(state.range(0)));
    const FlowField a = random_flow(3);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::flow_statistics(a));
    par::set_max_threads(0);
}

void bench_render_sphere(benchmark::State& state) {
    par::set_max_threads(static_cast<int>(state.range(0)));
    synth::CameraModel cam{500.0, 500.0, kW / 2.0, kH / 2.0, kW, kH};
    synth::ShapeSpec sphere;
    sphere.kind = synth::ShapeKind::kSphere;
    sphere.radius = 2.0;
    synth::RigidPose obj{{0.0, 0.0, 12.0}, {}};
    synth::RigidPose camera{};
    for (auto _ : state)
        benchmark::DoNotOptimize(synth::render_object_depth(sphere, obj, camera, cam));
    par::set_max_threads(0);
}

void bench_warp_mask(benchmark::State& state) {
    const FlowField f = random_flow(4);
    const Mask m = disk_mask(kW / 2, kH / 2, 200);
    for (auto _ : state) benchmark::DoNotOptimize(warp_mask_forward(m, f));
}

BENCHMARK(bench_endpoint_error_ref);
BENCHMARK(bench_endpoint_error_omp)->Arg(1)->Arg(0);
BENCHMARK(bench_wauc_ref);
BENCHMARK(bench_wauc_omp)->Arg(1)->Arg(0);
BENCHMARK(bench_nearest_ref);
BENCHMARK(bench_nearest_two_pass)->Arg(1)->Arg(0);
BENCHMARK(bench_direction_hist_ref);
BENCHMARK(bench_direction_hist_omp)->Arg(1)->Arg(0);
BENCHMARK(bench_render_sphere)->Arg(1)->Arg(0);
BENCHMARK(bench_warp_mask);

} // namespace

BENCHMARK_MAIN();
