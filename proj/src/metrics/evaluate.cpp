#include "amflow/metrics/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "amflow/errors.hpp"
#include "amflow/parallel.hpp"

namespace amflow::metrics {

namespace {

// Fractions are serialized with 6 decimal digits.
double round6(double x) { return std::llround(x * 1e6) / 1e6; }

nlohmann::ordered_json fraction_or_null(double value, bool present) {
    if (!present) return nullptr;
    return round6(value);
}

std::string format_fraction(double value, bool present) {
    if (!present) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

} // namespace

IouResult iou_level(const Mask& pred_mask, const Mask& gt_mask) {
    if (!pred_mask.same_size(gt_mask)) throw ShapeError("iou_level: dimension mismatch");

    std::int64_t tp = 0, fp = 0, fn = 0;
    const std::int64_t n = static_cast<std::int64_t>(pred_mask.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) \
    reduction(+ : tp, fp, fn)
    for (std::int64_t i = 0; i < n; ++i) {
        const bool p = pred_mask[static_cast<std::size_t>(i)] != 0;
        const bool g = gt_mask[static_cast<std::size_t>(i)] != 0;
        tp += (p && g);
        fp += (p && !g);
        fn += (!p && g);
    }

    IouResult r;
    r.counts = {static_cast<std::uint64_t>(tp), static_cast<std::uint64_t>(fp),
                static_cast<std::uint64_t>(fn)};
    if (r.counts.denominator() > 0) {
        r.iou = static_cast<double>(r.counts.tp) / static_cast<double>(r.counts.denominator());
        r.present = true;
    }
    return r;
}

FrameAccumulator evaluate_frame(const LayeredFlowStack& pred, const LayeredFlowStack& gt) {
    if (gt.num_levels() < 1 || pred.num_levels() < 1)
        throw ShapeError("evaluate_frame: empty stack");
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw ShapeError("evaluate_frame: stack dimension mismatch");

    const int n_levels = std::max(pred.num_levels(), gt.num_levels());
    const Mask empty(gt.width(), gt.height(), 0);

    FrameAccumulator acc;
    acc.levels.resize(n_levels);
    for (int n = 0; n < n_levels; ++n) {
        LevelAccumulator& lvl = acc.levels[n];
        const bool has_gt = n < gt.num_levels();
        const bool has_pred = n < pred.num_levels();

        if (has_gt) {
            const Mask& gt_mask = gt.levels[n].mask;
            lvl.gt_pixels = count_set(gt_mask);
            if (has_pred)
                accumulate_wauc(pred.levels[n].flow, gt.levels[n].flow, gt_mask, lvl.wauc_hist);
            else
                accumulate_wauc_missing(lvl.gt_pixels, lvl.wauc_hist);
        }

        const Mask& pm = has_pred ? pred.levels[n].mask : empty;
        const Mask& gm = has_gt ? gt.levels[n].mask : empty;
        lvl.confusion = iou_level(pm, gm).counts;
    }
    return acc;
}

EvalReport combine_accumulators(std::span<const FrameAccumulator> frames,
                                const WeightParams& params) {
    if (frames.empty()) throw EmptyEvaluation("no frames to evaluate");

    int n_levels = 0;
    for (const FrameAccumulator& f : frames)
        n_levels = std::max(n_levels, static_cast<int>(f.levels.size()));
    if (n_levels == 0) throw EmptyEvaluation("no levels to evaluate");

    // Pool per-level integer quantities in ascending frame order.
    std::vector<LevelAccumulator> pooled(n_levels);
    for (const FrameAccumulator& f : frames)
        for (std::size_t n = 0; n < f.levels.size(); ++n) pooled[n] += f.levels[n];

    const LevelWeights lw =
        LevelWeights::for_evaluation(n_levels, params.equal_prefix, params.w_last);

    EvalReport report;
    report.per_level.resize(n_levels);

    double wauc_num = 0.0, wauc_den = 0.0;
    double iou_num = 0.0, iou_den = 0.0;
    for (int n = 0; n < n_levels; ++n) {
        LevelScore& score = report.per_level[n];
        score.level = n;
        score.pixels = pooled[n].gt_pixels;

        const WaucResult wr = wauc_from_histogram(pooled[n].wauc_hist);
        score.wauc = wr.wauc;
        score.wauc_present = wr.present;
        if (wr.present) {
            wauc_num += lw.weights[n] * wr.wauc;
            wauc_den += lw.weights[n];
        }

        if (pooled[n].confusion.denominator() > 0) {
            score.iou = static_cast<double>(pooled[n].confusion.tp) /
                        static_cast<double>(pooled[n].confusion.denominator());
            score.iou_present = true;
            if (n >= 1) { // background is excluded from mIoU
                iou_num += lw.weights[n] * score.iou;
                iou_den += lw.weights[n];
            }
        }
    }

    if (wauc_den > 0.0) {
        report.mwauc = wauc_num / wauc_den;
        report.mwauc_present = true;
    }
    if (iou_den > 0.0) {
        report.miou = iou_num / iou_den;
        report.miou_present = true;
    }
    if (!report.mwauc_present && !report.miou_present)
        throw EmptyEvaluation("no level present in either prediction or ground truth");
    if (report.mwauc_present && report.miou_present) {
        report.afq = std::sqrt(report.mwauc * report.miou);
        report.afq_present = true;
    }
    return report;
}

EvalReport evaluate_stack(const LayeredFlowStack& pred, const LayeredFlowStack& gt,
                          const WeightParams& params) {
    const FrameAccumulator acc = evaluate_frame(pred, gt);
    return combine_accumulators({&acc, 1}, params);
}

EvalReport aggregate_reports(std::span<const FrameAccumulator> frames,
                             const WeightParams& params) {
    return combine_accumulators(frames, params);
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["afq"] = fraction_or_null(afq, afq_present);
    doc["mwauc"] = fraction_or_null(mwauc, mwauc_present);
    doc["miou"] = fraction_or_null(miou, miou_present);
    doc["per_level"] = nlohmann::ordered_json::array();
    for (const LevelScore& s : per_level) {
        nlohmann::ordered_json lvl;
        lvl["level"] = s.level;
        lvl["wauc"] = fraction_or_null(s.wauc, s.wauc_present);
        lvl["iou"] = fraction_or_null(s.iou, s.iou_present);
        lvl["pixels"] = s.pixels;
        lvl["present"] = s.wauc_present || s.iou_present;
        doc["per_level"].push_back(std::move(lvl));
    }
    return doc.dump(2) + "\n";
}

void EvalReport::print_table(std::ostream& os) const {
    char line[128];
    os << "level      wauc        iou    pixels\n";
    for (const LevelScore& s : per_level) {
        std::snprintf(line, sizeof(line), "%5d  %8s  %9s  %8llu\n", s.level,
                      format_fraction(s.wauc, s.wauc_present).c_str(),
                      format_fraction(s.iou, s.iou_present).c_str(),
                      static_cast<unsigned long long>(s.pixels));
        os << line;
    }
    auto summary = [&](const char* name, double value, bool present) {
        if (present)
            std::snprintf(line, sizeof(line), "%-6s %8.6f  (%.1f%%)\n", name, value,
                          100.0 * value);
        else
            std::snprintf(line, sizeof(line), "%-6s %8s\n", name, "-");
        os << line;
    };
    summary("mWAUC", mwauc, mwauc_present);
    summary("mIoU", miou, miou_present);
    summary("AFQ", afq, afq_present);
}

} // namespace amflow::metrics
