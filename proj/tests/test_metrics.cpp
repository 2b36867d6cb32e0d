#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "amflow/metrics/evaluate.hpp"
#include "amflow/metrics/statistics.hpp"
#include "amflow/metrics/wauc.hpp"
#include "amflow/metrics/weights.hpp"
#include "amflow/ref/reference.hpp"
#include "test_util.hpp"

using namespace amflow;
using namespace amflow::metrics;

TEST_CASE("threshold schedule endpoints") {
    CHECK(WaucThresholds::delta(1) == doctest::Approx(0.05));
    CHECK(WaucThresholds::delta(100) == doctest::Approx(5.0));
    CHECK(WaucThresholds::weight(1) == 1.0);
    CHECK(WaucThresholds::weight(100) == doctest::Approx(0.01));
    double sum = 0.0;
    for (int i = 1; i <= 100; ++i) sum += WaucThresholds::weight(i);
    CHECK(sum == doctest::Approx(50.5));
}

TEST_CASE("wauc analytic values") {
    const int w = 8, h = 6;
    const Mask mask(w, h, 1);
    const FlowField gt = testutil::constant_flow(w, h, 1.0f, 1.0f);

    SUBCASE("zero error scores exactly 1") {
        const WaucResult r = wauc_level(gt, gt, mask);
        CHECK(r.wauc == 1.0);
        CHECK(r.pixels == std::uint64_t(w) * h);
    }

    SUBCASE("constant 2.5 px error: arithmetic-series closed form") {
        // Errors of 2.5 px pass thresholds 50..100; the weight suffix sum
        // is sum_{i=50}^{100} (1 - (i-1)/100) = 13.26 of the total 50.5.
        const FlowField pred = testutil::constant_flow(w, h, 1.0f + 1.5f, 1.0f + 2.0f);
        const WaucResult r = wauc_level(pred, gt, mask);
        CHECK(r.wauc == doctest::Approx(13.26 / 50.5).epsilon(1e-9));
    }

    SUBCASE("error above 5 px scores 0") {
        const FlowField pred = testutil::constant_flow(w, h, 7.0f, 1.0f);
        const WaucResult r = wauc_level(pred, gt, mask);
        CHECK(r.wauc == 0.0);
    }

    SUBCASE("empty mask marks the level absent") {
        const WaucResult r = wauc_level(gt, gt, Mask(w, h, 0));
        CHECK_FALSE(r.present);
    }
}

TEST_CASE("wauc matches the literal reference on random fields") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        const FlowField pred = testutil::random_flow(21, 13, seed, -4.0f, 4.0f);
        const FlowField gt = testutil::random_flow(21, 13, seed + 100, -4.0f, 4.0f);
        const Mask mask = testutil::random_mask(21, 13, seed + 200, 0.7);
        if (count_set(mask) == 0) continue;
        const WaucResult r = wauc_level(pred, gt, mask);
        CHECK(r.wauc == doctest::Approx(ref::wauc(pred, gt, mask)).epsilon(1e-12));
    }
}

TEST_CASE("wauc monotonicity and permutation invariance") {
    const int w = 16, h = 10;
    const Mask mask(w, h, 1);
    const FlowField gt(w, h);

    FlowField pred = testutil::random_flow(w, h, 5, 0.0f, 6.0f);
    const double base = wauc_level(pred, gt, mask).wauc;

    SUBCASE("pointwise smaller errors never lower the score") {
        FlowField closer = pred;
        for (std::size_t i = 0; i < closer.size(); ++i) {
            closer.u[i] *= 0.5f;
            closer.v[i] *= 0.5f;
        }
        CHECK(wauc_level(closer, gt, mask).wauc >= base);
    }

    SUBCASE("pixel permutation within the mask leaves the score unchanged") {
        std::vector<std::size_t> perm(pred.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), std::mt19937(99));
        FlowField shuffled(w, h);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.u[i] = pred.u[perm[i]];
            shuffled.v[i] = pred.v[perm[i]];
        }
        CHECK(wauc_level(shuffled, gt, mask).wauc == base);
    }

    SUBCASE("duplicating the evaluation domain leaves the score unchanged") {
        FlowField doubled_pred(w * 2, h);
        FlowField doubled_gt(w * 2, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t src = pred.index(x, y);
                for (int copy = 0; copy < 2; ++copy) {
                    const std::size_t dst = doubled_pred.index(x + copy * w, y);
                    doubled_pred.u[dst] = pred.u[src];
                    doubled_pred.v[dst] = pred.v[src];
                    doubled_gt.u[dst] = 0.0f;
                    doubled_gt.v[dst] = 0.0f;
                }
            }
        CHECK(wauc_level(doubled_pred, doubled_gt, Mask(w * 2, h, 1)).wauc == base);
    }
}

TEST_CASE("iou examples") {
    SUBCASE("identical masks") {
        const Mask m = testutil::random_mask(9, 9, 3, 0.4);
        const IouResult r = iou_level(m, m);
        CHECK(r.iou == 1.0);
        CHECK(r.counts.fp == 0);
        CHECK(r.counts.fn == 0);
    }

    SUBCASE("all-ones prediction vs 2x2 corner on 3x3") {
        const Mask pred(3, 3, 1);
        const Mask gt = testutil::rect_mask(3, 3, 0, 0, 2, 2);
        const IouResult r = iou_level(pred, gt);
        CHECK(r.counts.tp == 4);
        CHECK(r.counts.fp == 5);
        CHECK(r.counts.fn == 0);
        CHECK(r.iou == doctest::Approx(4.0 / 9.0));
    }

    SUBCASE("disjoint nonempty masks") {
        const Mask a = testutil::rect_mask(8, 4, 0, 0, 3, 4);
        const Mask b = testutil::rect_mask(8, 4, 4, 0, 8, 4);
        CHECK(iou_level(a, b).iou == 0.0);
    }

    SUBCASE("symmetry and reference agreement") {
        const Mask a = testutil::random_mask(15, 11, 8, 0.3);
        const Mask b = testutil::random_mask(15, 11, 9, 0.6);
        const IouResult ab = iou_level(a, b);
        const IouResult ba = iou_level(b, a);
        CHECK(ab.iou == ba.iou);
        const auto counts = ref::confusion(a, b);
        CHECK(ab.counts.tp == counts[0]);
        CHECK(ab.counts.fp == counts[1]);
        CHECK(ab.counts.fn == counts[2]);
    }

    SUBCASE("both empty marks the level absent") {
        CHECK_FALSE(iou_level(Mask(4, 4, 0), Mask(4, 4, 0)).present);
    }
}

TEST_CASE("level weight schedule") {
    SUBCASE("paper defaults at N=8") {
        const LevelWeights lw = LevelWeights::make(8, 3, 0.25);
        REQUIRE(lw.weights.size() == 8);
        for (int n = 0; n <= 3; ++n) CHECK(lw.weights[n] == 1.0);
        CHECK(lw.weights[4] == doctest::Approx(0.70710678).epsilon(1e-7));
        CHECK(lw.weights[5] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(lw.weights[6] == doctest::Approx(0.35355339).epsilon(1e-7));
        CHECK(lw.weights[7] == 0.25);
    }

    SUBCASE("N=5 collapses to prefix plus last") {
        const LevelWeights lw = LevelWeights::make(5, 3, 0.25);
        CHECK(lw.weights == std::vector<double>{1.0, 1.0, 1.0, 1.0, 0.25});
    }

    SUBCASE("weights are nonincreasing") {
        const LevelWeights lw = LevelWeights::make(8, 3, 0.25);
        for (std::size_t n = 1; n < lw.weights.size(); ++n)
            CHECK(lw.weights[n] <= lw.weights[n - 1]);
    }

    SUBCASE("k >= N-1 is rejected") {
        CHECK_THROWS_AS(LevelWeights::make(4, 3, 0.25), ParameterError);
        CHECK_THROWS_AS(LevelWeights::make(2, 3, 0.25), ParameterError);
    }

    SUBCASE("evaluation schedule clamps k for short stacks") {
        CHECK(LevelWeights::for_evaluation(2, 3, 0.25).weights ==
              std::vector<double>{1.0, 0.25});
        CHECK(LevelWeights::for_evaluation(1, 3, 0.25).weights == std::vector<double>{1.0});
        CHECK(LevelWeights::for_evaluation(8, 3, 0.25).weights ==
              LevelWeights::make(8, 3, 0.25).weights);
    }
}

namespace {

LayeredFlowStack sample_stack(int w, int h, int n_levels, unsigned seed) {
    LayeredFlowStack stack;
    for (int n = 0; n < n_levels; ++n) {
        LevelField lf(w, h);
        lf.flow = testutil::random_flow(w, h, seed + n);
        lf.mask = n == 0 ? Mask(w, h, 1) : testutil::random_mask(w, h, seed + 50 + n, 0.4);
        stack.levels.push_back(std::move(lf));
    }
    return stack;
}

} // namespace

TEST_CASE("evaluate_stack") {
    SUBCASE("self-evaluation is exactly 1") {
        const LayeredFlowStack stack = sample_stack(20, 12, 4, 21);
        const EvalReport report = evaluate_stack(stack, stack);
        CHECK(report.afq == 1.0);
        CHECK(report.mwauc == 1.0);
        CHECK(report.miou == 1.0);
    }

    SUBCASE("prediction missing levels scores them zero but keeps weights") {
        const LayeredFlowStack gt = sample_stack(16, 10, 3, 33);
        LayeredFlowStack pred = gt;
        pred.levels.resize(2);
        const EvalReport report = evaluate_stack(pred, gt);
        REQUIRE(report.per_level.size() == 3);
        CHECK(report.per_level[2].wauc == 0.0);
        CHECK(report.per_level[2].wauc_present);
        CHECK(report.per_level[2].iou == 0.0);
        CHECK(report.per_level[2].iou_present);
        CHECK(report.miou < 1.0);
    }

    SUBCASE("levels empty on both sides are dropped with their weights") {
        LayeredFlowStack gt = sample_stack(16, 10, 3, 34);
        LayeredFlowStack pred = gt;
        gt.levels[2].mask = Mask(16, 10, 0);
        pred.levels[2].mask = Mask(16, 10, 0);
        const EvalReport report = evaluate_stack(pred, gt);
        CHECK_FALSE(report.per_level[2].wauc_present);
        CHECK_FALSE(report.per_level[2].iou_present);
        CHECK(report.miou == 1.0); // only level 1 contributes
        CHECK(report.afq == 1.0);
    }

    SUBCASE("afq is the geometric mean") {
        const LayeredFlowStack gt = sample_stack(16, 10, 3, 35);
        LayeredFlowStack pred = gt;
        pred.levels[1].mask = testutil::random_mask(16, 10, 77, 0.4);
        pred.levels[2].flow = testutil::random_flow(16, 10, 78);
        const EvalReport report = evaluate_stack(pred, gt);
        CHECK(report.afq == doctest::Approx(std::sqrt(report.mwauc * report.miou)).epsilon(1e-12));
    }

    SUBCASE("dimension mismatch throws") {
        const LayeredFlowStack a = sample_stack(8, 8, 2, 1);
        const LayeredFlowStack b = sample_stack(9, 8, 2, 1);
        CHECK_THROWS_AS(evaluate_stack(a, b), ShapeError);
    }
}

TEST_CASE("table-one rows recombine under the afq formula") {
    // (afq, mwauc, miou) percentages; the two rows commented out are the
    // published table's own aggregation outliers (see acceptance notes).
    const std::vector<std::array<double, 3>> rows = {
        {21.7, 20.1, 23.5}, {31.2, 41.5, 23.5}, {41.6, 43.7, 39.6}, {45.8, 49.4, 42.4},
        {20.1, 18.8, 21.5}, {22.5, 23.6, 21.5}, {27.3, 34.6, 21.5}, {39.6, 42.0, 37.3},
    };
    for (const auto& [afq, mwauc, miou] : rows) {
        const double combined = 100.0 * std::sqrt((mwauc / 100.0) * (miou / 100.0));
        CHECK(std::abs(combined - afq) <= 0.05);
    }
}

TEST_CASE("aggregation pools counts exactly") {
    const LayeredFlowStack gt = sample_stack(14, 9, 3, 40);
    LayeredFlowStack pred = gt;
    pred.levels[1].flow = testutil::random_flow(14, 9, 41, -2.0f, 2.0f);
    pred.levels[2].mask = testutil::random_mask(14, 9, 42, 0.5);

    const FrameAccumulator acc = evaluate_frame(pred, gt);

    SUBCASE("single frame equals evaluate_stack") {
        const EvalReport direct = evaluate_stack(pred, gt);
        const EvalReport pooled = aggregate_reports({&acc, 1});
        CHECK(pooled.afq == direct.afq);
        CHECK(pooled.mwauc == direct.mwauc);
        CHECK(pooled.miou == direct.miou);
    }

    SUBCASE("duplicated frame yields the identical report") {
        const std::vector<FrameAccumulator> twice = {acc, acc};
        const EvalReport once = aggregate_reports({&acc, 1});
        const EvalReport doubled = aggregate_reports(twice);
        CHECK(doubled.afq == once.afq);
        CHECK(doubled.mwauc == once.mwauc);
        CHECK(doubled.miou == once.miou);
    }

    SUBCASE("frames with disjoint levels keep their own values") {
        LayeredFlowStack gt_a = sample_stack(14, 9, 3, 50);
        gt_a.levels[2].mask = Mask(14, 9, 0);
        LayeredFlowStack pred_a = gt_a;
        pred_a.levels[1].flow = testutil::random_flow(14, 9, 51, -3.0f, 3.0f);

        LayeredFlowStack gt_b = sample_stack(14, 9, 3, 60);
        gt_b.levels[1].mask = Mask(14, 9, 0);
        LayeredFlowStack pred_b = gt_b;
        pred_b.levels[2].flow = testutil::random_flow(14, 9, 61, -3.0f, 3.0f);

        // Empty levels must contribute no confusion counts either.
        pred_a.levels[2].mask = Mask(14, 9, 0);
        pred_b.levels[1].mask = Mask(14, 9, 0);

        const std::vector<FrameAccumulator> frames = {evaluate_frame(pred_a, gt_a),
                                                      evaluate_frame(pred_b, gt_b)};
        const EvalReport pooled = aggregate_reports(frames);
        const EvalReport only_a = evaluate_stack(pred_a, gt_a);
        const EvalReport only_b = evaluate_stack(pred_b, gt_b);
        CHECK(pooled.per_level[1].wauc == only_a.per_level[1].wauc);
        CHECK(pooled.per_level[2].wauc == only_b.per_level[2].wauc);
    }

    SUBCASE("frame order does not change the pooled report") {
        const LayeredFlowStack gt2 = sample_stack(14, 9, 2, 70);
        LayeredFlowStack pred2 = gt2;
        pred2.levels[1].flow = testutil::random_flow(14, 9, 71);
        const FrameAccumulator acc2 = evaluate_frame(pred2, gt2);

        const std::vector<FrameAccumulator> ab = {acc, acc2};
        const std::vector<FrameAccumulator> ba = {acc2, acc};
        CHECK(aggregate_reports(ab).to_json() == aggregate_reports(ba).to_json());
    }
}

TEST_CASE("eval report serialization") {
    const LayeredFlowStack stack = sample_stack(10, 8, 2, 80);
    const EvalReport report = evaluate_stack(stack, stack);
    const std::string json = report.to_json();
    CHECK(json.find("\"afq\": 1.0") != std::string::npos);
    CHECK(json.find("\"per_level\"") != std::string::npos);

    std::ostringstream table;
    report.print_table(table);
    CHECK(table.str().find("AFQ") != std::string::npos);
    CHECK(table.str().find("1.000000") != std::string::npos);
}

TEST_CASE("flow statistics") {
    SUBCASE("constant (1,0) flow: single direction bin, single gradient bin") {
        const FlowField f = testutil::constant_flow(12, 9, 1.0f, 0.0f);
        const FlowStatistics stats = flow_statistics(f);
        CHECK(stats.direction[18] == f.size()); // bin containing angle 0
        CHECK(stats.direction_total() == f.size());
        CHECK(stats.du_dx[50] == std::uint64_t(11) * 9); // bin containing 0
        CHECK(stats.du_dx_total() == std::uint64_t(11) * 9);
    }

    SUBCASE("near-zero displacements are excluded from the direction histogram") {
        FlowField f(6, 6);
        f.u[0] = 2.0f; // one moving pixel
        const FlowStatistics stats = flow_statistics(f);
        CHECK(stats.direction_total() == 1);
    }

    SUBCASE("horizontal ramp concentrates the gradient at 1") {
        FlowField f(10, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 10; ++x) f.u[f.index(x, y)] = static_cast<float>(x);
        const FlowStatistics stats = flow_statistics(f);
        std::uint64_t populated = 0;
        int populated_bin = -1;
        for (int b = 0; b < FlowStatistics::kGradientBins; ++b)
            if (stats.du_dx[b] > 0) {
                populated += stats.du_dx[b];
                populated_bin = b;
            }
        CHECK(populated == std::uint64_t(9) * 4);
        CHECK(populated_bin == 55); // bin containing 1.0
        CHECK(FlowStatistics::gradient_bin_lo(55) <= 1.0);
        CHECK(FlowStatistics::gradient_bin_hi(55) > 1.0);
    }

    SUBCASE("gradients are clipped into the edge bins") {
        FlowField f(4, 1);
        f.u = {0.0f, 50.0f, 0.0f, -80.0f};
        const FlowStatistics stats = flow_statistics(f);
        CHECK(stats.du_dx[FlowStatistics::kGradientBins - 1] == 1); // +50
        CHECK(stats.du_dx[0] >= 1);                                 // -80
        CHECK(stats.du_dx_total() == 3);
    }

    SUBCASE("parallel kernel matches the serial reference") {
        const FlowField f = testutil::random_flow(31, 17, 90);
        const FlowStatistics stats = flow_statistics(f);
        const std::vector<std::uint64_t> reference = ref::direction_histogram(f);
        for (int b = 0; b < FlowStatistics::kDirectionBins; ++b)
            CHECK(stats.direction[b] == reference[b]);
    }

    SUBCASE("csv has a header plus 36 + 101 rows") {
        const FlowField f = testutil::constant_flow(5, 5, 1.0f, 2.0f);
        std::ostringstream csv;
        flow_statistics(f).write_csv(csv);
        std::uint64_t lines = 0;
        for (char c : csv.str())
            if (c == '\n') ++lines;
        CHECK(lines == 1 + 36 + 101);
    }
}
