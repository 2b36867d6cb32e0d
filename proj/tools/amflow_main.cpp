#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "amflow/baselines/infill.hpp"
#include "amflow/colorize.hpp"
#include "amflow/errors.hpp"
#include "amflow/flo_io.hpp"
#include "amflow/log.hpp"
#include "amflow/metrics/evaluate.hpp"
#include "amflow/metrics/statistics.hpp"
#include "amflow/parallel.hpp"
#include "amflow/png_io.hpp"
#include "amflow/stack_io.hpp"
#include "amflow/stratify.hpp"
#include "amflow/synth/generate.hpp"
#include "amflow/synth/scene.hpp"
#include "amflow/track/tracker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d", index);
    return buf;
}

std::optional<int> parse_frame_name(const std::string& name) {
    std::string stem = name;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".amfl")
        stem = stem.substr(0, stem.size() - 5);
    if (stem.rfind("frame_", 0) != 0 || stem.size() != 12) return std::nullopt;
    for (std::size_t i = 6; i < stem.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(stem[i]))) return std::nullopt;
    return std::stoi(stem.substr(6));
}

// Stack payload for frame `index` inside `root`: a frame directory with
// level files, or a frame_%06d.amfl container.
std::optional<fs::path> find_stack(const fs::path& root, int index) {
    const fs::path dir = root / frame_name(index);
    if (fs::exists(dir / "level_0.flo")) return dir;
    const fs::path amfl = root / (frame_name(index) + ".amfl");
    if (fs::exists(amfl)) return amfl;
    return std::nullopt;
}

// Ascending frame indices for which `root` holds a stack payload.
std::vector<int> list_stack_frames(const fs::path& root) {
    if (!fs::is_directory(root)) throw amflow::IoError("not a directory: " + root.string());
    std::set<int> indices;
    for (const auto& entry : fs::directory_iterator(root)) {
        const auto index = parse_frame_name(entry.path().filename().string());
        if (index && find_stack(root, *index)) indices.insert(*index);
    }
    return {indices.begin(), indices.end()};
}

std::vector<int> list_segmentation_frames(const fs::path& root) {
    if (!fs::is_directory(root)) throw amflow::IoError("not a directory: " + root.string());
    std::set<int> indices;
    for (const auto& entry : fs::directory_iterator(root)) {
        const auto index = parse_frame_name(entry.path().filename().string());
        if (index && fs::exists(entry.path() / "visible_ids.png")) indices.insert(*index);
    }
    return {indices.begin(), indices.end()};
}

struct SegFrame {
    std::map<int, amflow::Mask> visible;
    std::map<int, amflow::Mask> amodal; // missing entries fall back to visible
};

SegFrame load_segmentation(const fs::path& frame_dir) {
    SegFrame seg;
    const amflow::Raster<std::uint16_t> ids =
        amflow::read_png_gray16(frame_dir / "visible_ids.png");

    std::set<int> present;
    for (std::size_t p = 0; p < ids.size(); ++p)
        if (ids[p] != 0) present.insert(ids[p]);
    for (int id : present) {
        amflow::Mask mask(ids.width(), ids.height(), 0);
        for (std::size_t p = 0; p < ids.size(); ++p)
            if (ids[p] == id) mask[p] = 1;
        seg.visible.emplace(id, std::move(mask));
    }

    for (const auto& entry : fs::directory_iterator(frame_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("inst_", 0) != 0) continue;
        const std::size_t suffix = name.find("_amodal.png");
        if (suffix == std::string::npos) continue;
        const int id = std::stoi(name.substr(5, suffix - 5));
        seg.amodal.emplace(id, amflow::read_mask_png(entry.path()));
        if (!seg.visible.count(id)) {
            // Fully occluded instance: present amodally only.
            seg.visible.emplace(id, amflow::Mask(ids.width(), ids.height(), 0));
        }
    }
    return seg;
}

const amflow::Mask& amodal_or_visible(const SegFrame& seg, int id) {
    auto it = seg.amodal.find(id);
    if (it != seg.amodal.end()) return it->second;
    return seg.visible.at(id);
}

// manifest.json of a generated directory: per frame, instance id -> level.
struct ManifestLevels {
    std::map<int, std::map<int, int>> frame_levels;
    bool loaded = false;
};

ManifestLevels load_manifest_levels(const fs::path& root) {
    ManifestLevels m;
    const fs::path path = root / "manifest.json";
    if (!fs::exists(path)) return m;
    std::ifstream in(path);
    json doc;
    try {
        doc = json::parse(in);
        for (const json& jf : doc.at("frames")) {
            const int frame = jf.at("frame").get<int>();
            for (const json& jo : jf.at("objects"))
                m.frame_levels[frame][jo.at("id").get<int>()] = jo.at("level").get<int>();
        }
        m.loaded = true;
    } catch (const json::exception& e) {
        throw amflow::FormatError("manifest.json: " + std::string(e.what()));
    }
    return m;
}

int run_eval(const fs::path& gt_dir, const fs::path& pred_dir, int k, double w_last,
             const std::string& json_out) {
    const std::vector<int> gt_frames = list_stack_frames(gt_dir);
    if (gt_frames.empty())
        throw amflow::FormatError("no flow frames found under " + gt_dir.string());

    std::vector<int> missing;
    for (int f : gt_frames)
        if (!find_stack(pred_dir, f)) missing.push_back(f);
    if (!missing.empty()) {
        std::string msg = "prediction is missing frames:";
        for (int f : missing) msg += " " + frame_name(f);
        throw amflow::FormatError(msg);
    }

    std::vector<amflow::metrics::FrameAccumulator> accumulators(gt_frames.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(amflow::par::max_threads())
    for (std::size_t i = 0; i < gt_frames.size(); ++i) {
        try {
            const amflow::LayeredFlowStack gt =
                amflow::read_stack(*find_stack(gt_dir, gt_frames[i]));
            const amflow::LayeredFlowStack pred =
                amflow::read_stack(*find_stack(pred_dir, gt_frames[i]));
            accumulators[i] = amflow::metrics::evaluate_frame(pred, gt);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const amflow::metrics::EvalReport report =
        amflow::metrics::aggregate_reports(accumulators, {k, w_last});

    std::printf("evaluated %zu frame(s): %s vs %s\n", gt_frames.size(),
                pred_dir.string().c_str(), gt_dir.string().c_str());
    report.print_table(std::cout);
    if (!json_out.empty()) {
        std::ofstream out(json_out, std::ios::trunc);
        if (!out) throw amflow::IoError("cannot write " + json_out);
        out << report.to_json();
    }
    return 0;
}

int run_gen(const fs::path& scene_path, const fs::path& out_dir, int frames) {
    const amflow::synth::SceneSpec scene = amflow::synth::load_scene(scene_path);
    amflow::synth::GenerateOptions options;
    options.frame_override = frames;
    amflow::synth::generate(scene, out_dir, options);
    const int used = frames > 0 ? frames : scene.frame_count;
    std::printf("generated %d frame(s) (%d pairs) into %s\n", used, used - 1,
                out_dir.string().c_str());
    return 0;
}

int run_baseline(const std::string& method, const fs::path& flow_dir, const fs::path& masks_dir,
                 const fs::path& out_dir) {
    std::vector<int> frames;
    for (int f : list_segmentation_frames(masks_dir))
        if (fs::exists(flow_dir / frame_name(f) / "modal.flo")) frames.push_back(f);
    if (frames.empty())
        throw amflow::FormatError("no frames with both masks and modal flow found");

    const ManifestLevels manifest = load_manifest_levels(masks_dir);
    fs::create_directories(out_dir);

    for (int f : frames) {
        const fs::path mask_frame = masks_dir / frame_name(f);
        const fs::path flow_frame = flow_dir / frame_name(f);

        amflow::baselines::InfillInput input;
        input.modal = amflow::read_flo(flow_frame / "modal.flo");
        if (fs::exists(flow_frame / "level_0.flo"))
            input.background = amflow::read_flo(flow_frame / "level_0.flo");

        const SegFrame seg = load_segmentation(mask_frame);
        for (const auto& [id, visible] : seg.visible) {
            amflow::Instance inst;
            inst.id = id;
            inst.visible = visible;
            inst.amodal = amodal_or_visible(seg, id);
            input.instances.instances.push_back(std::move(inst));
        }

        if (manifest.loaded && manifest.frame_levels.count(f)) {
            const auto& levels = manifest.frame_levels.at(f);
            for (const amflow::Instance& inst : input.instances.instances) {
                auto it = levels.find(inst.id);
                if (it == levels.end())
                    throw amflow::FormatError("manifest has no level for instance " +
                                              std::to_string(inst.id));
                input.occlusion.nodes.push_back(inst.id);
                input.occlusion.levels[inst.id] = it->second;
            }
        } else {
            // No manifest: a is in front of b when a's visible region
            // covers part of b's occluded region.
            std::vector<std::pair<int, int>> in_front;
            const auto& insts = input.instances.instances;
            for (const amflow::Instance& a : insts) {
                for (const amflow::Instance& b : insts) {
                    if (a.id == b.id) continue;
                    bool front = false;
                    for (std::size_t p = 0; p < a.visible.size() && !front; ++p)
                        front = a.visible[p] && b.amodal[p] && !b.visible[p];
                    if (front) in_front.emplace_back(a.id, b.id);
                }
            }
            input.occlusion = amflow::stratify(input.instances, in_front);
        }

        amflow::LayeredFlowStack stack;
        if (method == "near-boundary")
            stack = amflow::baselines::infill_near_boundary(input);
        else if (method == "mean")
            stack = amflow::baselines::infill_mean(input);
        else
            stack = amflow::baselines::zero_baseline(input);
        amflow::write_stack(stack, out_dir / frame_name(f));
    }
    std::printf("wrote %zu %s baseline stack(s) into %s\n", frames.size(), method.c_str(),
                out_dir.string().c_str());
    return 0;
}

int run_track(const fs::path& seg_dir, const fs::path& flow_dir, bool amodal, double min_iou,
              const fs::path& out_file) {
    const std::vector<int> frames = list_segmentation_frames(seg_dir);
    if (frames.size() < 2)
        throw amflow::FormatError("tracking needs at least two segmentation frames");

    std::vector<int> missing;
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        const fs::path frame_dir = flow_dir / frame_name(frames[i]);
        const bool ok = amodal ? find_stack(flow_dir, frames[i]).has_value()
                               : fs::exists(frame_dir / "modal.flo");
        if (!ok) missing.push_back(frames[i]);
    }
    if (!missing.empty()) {
        std::string msg = "flow is missing for frames:";
        for (int f : missing) msg += " " + frame_name(f);
        throw amflow::FormatError(msg);
    }

    std::vector<SegFrame> segs;
    segs.reserve(frames.size());
    for (int f : frames) segs.push_back(load_segmentation(seg_dir / frame_name(f)));

    // Only visibly detected instances enter the tracker; amodal mode swaps
    // in their amodal masks.
    auto detections = [&](const SegFrame& seg) {
        std::vector<amflow::track::Detection> dets;
        for (const auto& [id, visible] : seg.visible) {
            if (amflow::count_set(visible) == 0) continue;
            amflow::track::Detection det;
            det.input_id = id;
            det.mask = amodal ? amodal_or_visible(seg, id) : visible;
            dets.push_back(std::move(det));
        }
        return dets;
    };

    amflow::track::TrackState state;
    state.options.min_iou = min_iou;
    state.options.amodal = amodal;

    std::vector<amflow::track::FrameAssignments> assignments(frames.size());
    assignments[0] = amflow::track::observe_first(state, detections(segs[0]));

    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        amflow::FlowField modal;
        amflow::LayeredFlowStack stack;
        amflow::track::FlowSource source;
        if (amodal) {
            stack = amflow::read_stack(*find_stack(flow_dir, frames[i]));
            source.stack = &stack;
        } else {
            modal = amflow::read_flo(flow_dir / frame_name(frames[i]) / "modal.flo");
            source.modal = &modal;
        }
        assignments[i + 1] = amflow::track::step(state, source, detections(segs[i + 1]));
    }

    // Score against the input ids (meaningful when they are temporally
    // consistent ground truth, as in generated scenes).
    std::vector<std::vector<amflow::track::ScoredInstance>> gt_frames(frames.size());
    std::vector<std::vector<amflow::track::ScoredInstance>> pred_frames(frames.size());
    std::map<int, std::map<int, int>> assigned; // frame -> input id -> track id
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (const auto& [input_id, track_id] : assignments[i])
            assigned[static_cast<int>(i)][input_id] = track_id;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        for (const auto& [id, visible] : segs[i].visible) {
            if (amflow::count_set(visible) == 0) continue;
            gt_frames[i].push_back({id, &visible});
            auto it = assigned[static_cast<int>(i)].find(id);
            if (it != assigned[static_cast<int>(i)].end())
                pred_frames[i].push_back({it->second, &visible});
        }
    }
    const amflow::track::TrackScore score = amflow::track::score_tracking(gt_frames, pred_frames);

    nlohmann::ordered_json doc;
    doc["amodal"] = amodal;
    doc["min_iou"] = min_iou;
    doc["frames"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        nlohmann::ordered_json jf;
        jf["frame"] = frames[i];
        jf["assignments"] = nlohmann::ordered_json::array();
        for (const auto& [input_id, track_id] : assignments[i]) {
            nlohmann::ordered_json ja;
            ja["instance"] = input_id;
            ja["track"] = track_id;
            jf["assignments"].push_back(std::move(ja));
        }
        doc["frames"].push_back(std::move(jf));
    }
    doc["score"]["association_accuracy"] = score.association_accuracy;
    doc["score"]["id_switches"] = score.id_switches;
    doc["score"]["checks"] = score.checks;

    std::ofstream out(out_file, std::ios::trunc);
    if (!out) throw amflow::IoError("cannot write " + out_file.string());
    out << doc.dump(2) << "\n";

    std::printf("%s tracking over %zu frames: association accuracy %.6f, %llu switch(es)\n",
                amodal ? "amodal" : "modal", frames.size(), score.association_accuracy,
                static_cast<unsigned long long>(score.id_switches));
    return 0;
}

int run_stats(const fs::path& flow_dir, const fs::path& out_csv) {
    std::vector<fs::path> files;
    if (fs::is_directory(flow_dir)) {
        for (const auto& entry : fs::recursive_directory_iterator(flow_dir))
            if (entry.path().extension() == ".flo") files.push_back(entry.path());
    } else if (flow_dir.extension() == ".flo" && fs::exists(flow_dir)) {
        files.push_back(flow_dir);
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw amflow::FormatError("no .flo files found under " + flow_dir.string());

    amflow::metrics::FlowStatistics pooled;
    for (const fs::path& f : files) pooled += amflow::metrics::flow_statistics(amflow::read_flo(f));

    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw amflow::IoError("cannot write " + out_csv.string());
    pooled.write_csv(out);
    std::printf("pooled statistics over %zu field(s) -> %s\n", files.size(),
                out_csv.string().c_str());
    return 0;
}

int run_viz(const fs::path& stack_dir, int frame, const fs::path& out_png) {
    const auto payload = find_stack(stack_dir, frame);
    if (!payload)
        throw amflow::FormatError("no stack for " + frame_name(frame) + " under " +
                                  stack_dir.string());
    const amflow::LayeredFlowStack stack = amflow::read_stack(*payload);
    const amflow::ColorImage img = amflow::composite_visualization(stack);
    amflow::write_png_rgb8(img, out_png);
    std::printf("wrote %s (%d level(s), %dx%d)\n", out_png.string().c_str(), stack.num_levels(),
                img.width, img.height);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"amflow: amodal optical flow toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

    std::string gt_dir, pred_dir, json_out;
    int eval_k = 3;
    double eval_w_last = 0.25;
    CLI::App* eval = app.add_subcommand("eval", "Score a prediction directory against ground truth");
    eval->add_option("--gt", gt_dir, "Ground-truth stack directory")->required();
    eval->add_option("--pred", pred_dir, "Prediction stack directory")->required();
    eval->add_option("--k", eval_k, "Equal-weight level prefix")->capture_default_str();
    eval->add_option("--w-last", eval_w_last, "Weight of the last level")->capture_default_str();
    eval->add_option("--json", json_out, "Write the report as JSON to this path");

    std::string scene_file, gen_out;
    int gen_frames = 0;
    CLI::App* gen = app.add_subcommand("gen", "Generate ground truth from a scene description");
    gen->add_option("--scene", scene_file, "Scene JSON file")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--frames", gen_frames, "Generate only the first K frames");

    std::string bl_method, bl_flow, bl_masks, bl_out;
    CLI::App* baseline = app.add_subcommand("baseline", "Run a non-learned infilling predictor");
    baseline->add_option("--method", bl_method, "near-boundary | mean | zero")
        ->required()
        ->check(CLI::IsMember({"near-boundary", "mean", "zero"}));
    baseline->add_option("--flow", bl_flow, "Directory with per-frame modal.flo")->required();
    baseline->add_option("--masks", bl_masks, "Directory with per-frame segmentation")->required();
    baseline->add_option("--out", bl_out, "Output directory for predicted stacks")->required();

    std::string tr_seg, tr_flow, tr_out;
    bool tr_amodal = false;
    double tr_min_iou = 0.1;
    CLI::App* track = app.add_subcommand("track", "Propagate instance ids with flow warping");
    track->add_option("--seg", tr_seg, "Directory with per-frame visible_ids.png")->required();
    track->add_option("--flow", tr_flow, "Directory with per-frame flow")->required();
    track->add_flag("--amodal", tr_amodal, "Warp amodal masks with their flow layer");
    track->add_option("--min-iou", tr_min_iou, "Match acceptance threshold")->capture_default_str();
    track->add_option("--out", tr_out, "Track file (JSON)")->required();

    std::string st_flow, st_out;
    CLI::App* stats = app.add_subcommand("stats", "Flow direction/gradient histograms");
    stats->add_option("--flow", st_flow, "Directory scanned recursively for .flo files")
        ->required();
    stats->add_option("--out", st_out, "Output CSV path")->required();

    std::string vz_stack, vz_out;
    int vz_frame = 0;
    CLI::App* viz = app.add_subcommand("viz", "Composite flow visualization");
    viz->add_option("--stack", vz_stack, "Stack root directory")->required();
    viz->add_option("--frame", vz_frame, "Frame index")->capture_default_str();
    viz->add_option("--out", vz_out, "Output PNG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    amflow::par::set_max_threads(threads);

    try {
        if (eval->parsed()) return run_eval(gt_dir, pred_dir, eval_k, eval_w_last, json_out);
        if (gen->parsed()) return run_gen(scene_file, gen_out, gen_frames);
        if (baseline->parsed()) return run_baseline(bl_method, bl_flow, bl_masks, bl_out);
        if (track->parsed()) return run_track(tr_seg, tr_flow, tr_amodal, tr_min_iou, tr_out);
        if (stats->parsed()) return run_stats(st_flow, st_out);
        if (viz->parsed()) return run_viz(vz_stack, vz_frame, vz_out);
    } catch (const amflow::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
