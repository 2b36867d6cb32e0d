#include "amflow/synth/generate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include <nlohmann/json.hpp>

#include <fstream>

#include "amflow/flo_io.hpp"
#include "amflow/log.hpp"
#include "amflow/parallel.hpp"
#include "amflow/png_io.hpp"
#include "amflow/stack_io.hpp"
#include "amflow/stratify.hpp"

namespace amflow::synth {

namespace fs = std::filesystem;

VisibilityResult compose_visibility(const std::vector<ObjectSpec>& objects,
                                    const std::vector<Raster<float>>& object_depths,
                                    const Raster<float>& background_depth) {
    if (objects.size() != object_depths.size())
        throw ShapeError("compose_visibility: one depth raster per object required");
    const int w = background_depth.width(), h = background_depth.height();
    for (const auto& d : object_depths)
        if (!d.same_size(w, h)) throw ShapeError("compose_visibility: depth dimensions disagree");

    VisibilityResult result;
    result.winner = Raster<std::uint16_t>(w, h, 0);

    const std::int64_t n = static_cast<std::int64_t>(background_depth.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (std::int64_t p = 0; p < n; ++p) {
        float best = background_depth[static_cast<std::size_t>(p)];
        std::uint16_t winner = 0;
        for (std::size_t k = 0; k < object_depths.size(); ++k) {
            const float d = object_depths[k][static_cast<std::size_t>(p)];
            const auto id = static_cast<std::uint16_t>(objects[k].id);
            if (d < best) {
                best = d;
                winner = id;
            } else if (d == best && winner != 0 && id < winner) {
                // Exact object-vs-object ties break toward the lower id;
                // ties against the background keep the background.
                winner = id;
            }
        }
        result.winner[static_cast<std::size_t>(p)] = winner;
    }

    for (std::size_t k = 0; k < objects.size(); ++k) {
        Instance inst;
        inst.id = objects[k].id;
        inst.class_label = objects[k].class_label;
        inst.amodal = Mask(w, h, 0);
        inst.visible = Mask(w, h, 0);
        double depth_sum = 0.0;
        std::uint64_t amodal_count = 0;
        for (std::size_t p = 0; p < inst.amodal.size(); ++p) {
            const float d = object_depths[k][p];
            if (std::isfinite(d)) {
                inst.amodal[p] = 1;
                depth_sum += d;
                ++amodal_count;
            }
            if (result.winner[p] == inst.id) inst.visible[p] = 1;
        }
        if (amodal_count == 0) continue; // outside the frustum this frame
        inst.mean_depth = depth_sum / static_cast<double>(amodal_count);
        result.instances.instances.push_back(std::move(inst));
    }
    return result;
}

ObjectFlowResult object_flow(const RigidPose& object_t, const RigidPose& object_t1,
                             const RigidPose& camera_t, const RigidPose& camera_t1,
                             const Raster<float>& amodal_depth_t, const CameraModel& camera) {
    if (!amodal_depth_t.same_size(camera.width, camera.height))
        throw ShapeError("object_flow: depth raster does not match the camera");

    ObjectFlowResult result;
    result.flow = FlowField(camera.width, camera.height);
    result.valid = Mask(camera.width, camera.height, 0);

#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const float depth = amodal_depth_t.at(x, y);
            if (!std::isfinite(depth)) continue;
            const double px = x + 0.5, py = y + 0.5;
            const Vec3 ray = camera.ray_direction(px, py);
            const Vec3 cam_point{ray.x * depth, ray.y * depth, ray.z * depth};
            const Vec3 world_t = camera_t.apply(cam_point);
            const Vec3 local = object_t.apply_inverse(world_t);
            const Vec3 world_t1 = object_t1.apply(local);
            const Vec3 cam_point_t1 = camera_t1.apply_inverse(world_t1);
            if (cam_point_t1.z <= 0.0) continue; // projects behind the camera
            double qx = 0.0, qy = 0.0;
            camera.project(cam_point_t1, qx, qy);
            const std::size_t i = result.flow.index(x, y);
            result.flow.u[i] = static_cast<float>(qx - px);
            result.flow.v[i] = static_cast<float>(qy - py);
            result.valid.at(x, y) = 1;
        }
    }
    return result;
}

FlowField background_flow(const RigidPose& camera_t, const RigidPose& camera_t1,
                          const BackgroundSpec& background, const CameraModel& camera) {
    const Raster<float> depth = render_background_depth(background, camera_t, camera);
    for (std::size_t i = 0; i < depth.size(); ++i)
        if (!std::isfinite(depth[i]))
            throw SceneError("background depth has holes; camera outside the far sphere?");

    static const RigidPose identity{};
    ObjectFlowResult r = object_flow(identity, identity, camera_t, camera_t1, depth, camera);
    if (count_set(r.valid) != r.valid.size())
        AMFLOW_LOG_WARN("background pixels projecting behind the camera were zero-filled");
    return std::move(r.flow);
}

FrameGroundTruth make_frame_ground_truth(const SceneSpec& scene, int frame) {
    scene.validate();
    if (frame < 0 || frame + 1 >= scene.frame_count)
        throw SceneError("make_frame_ground_truth: frame pair out of range");

    const CameraModel& cam = scene.camera;
    const RigidPose& cam_t = scene.camera_poses[frame];
    const RigidPose& cam_t1 = scene.camera_poses[frame + 1];

    // Amodal depths for every scene object at frame t.
    std::vector<Raster<float>> all_depths(scene.objects.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(par::max_threads())
    for (std::size_t k = 0; k < scene.objects.size(); ++k)
        all_depths[k] =
            render_object_depth(scene.objects[k].shape, scene.objects[k].poses[frame], cam_t, cam);

    const Raster<float> bg_depth = render_background_depth(scene.background, cam_t, cam);

    FrameGroundTruth fgt;
    VisibilityResult vis = compose_visibility(scene.objects, all_depths, bg_depth);
    fgt.visible_winner = std::move(vis.winner);
    fgt.instances = std::move(vis.instances);

    // Keep depth rasters only for instances present in the frame.
    fgt.amodal_depths.reserve(fgt.instances.instances.size());
    std::vector<const ObjectSpec*> present;
    for (const Instance& inst : fgt.instances.instances) {
        for (std::size_t k = 0; k < scene.objects.size(); ++k) {
            if (scene.objects[k].id == inst.id) {
                fgt.amodal_depths.push_back(all_depths[k]);
                present.push_back(&scene.objects[k]);
                break;
            }
        }
    }

    fgt.occlusion = stratify(fgt.instances, fgt.amodal_depths);

    const int num_levels = 1 + fgt.occlusion.max_level();
    if (num_levels > kMaxLevels)
        throw FormatError("scene stratifies into " + std::to_string(num_levels) +
                          " levels, above the " + std::to_string(kMaxLevels) + "-level cap");

    fgt.stack.levels.assign(num_levels, LevelField(cam.width, cam.height));
    fgt.stack.levels[0].flow = background_flow(cam_t, cam_t1, scene.background, cam);
    fgt.stack.levels[0].mask = Mask(cam.width, cam.height, 1);

    fgt.modal = fgt.stack.levels[0].flow; // overwritten where objects win

    for (std::size_t k = 0; k < present.size(); ++k) {
        const ObjectSpec& obj = *present[k];
        const Instance& inst = fgt.instances.instances[k];
        const int level = fgt.occlusion.levels.at(obj.id);
        ObjectFlowResult of = object_flow(obj.poses[frame], obj.poses[frame + 1], cam_t, cam_t1,
                                          fgt.amodal_depths[k], cam);

        LevelField& lf = fgt.stack.levels[level];
        for (std::size_t p = 0; p < of.valid.size(); ++p) {
            if (!of.valid[p]) continue;
            lf.mask[p] = 1;
            lf.flow.u[p] = of.flow.u[p];
            lf.flow.v[p] = of.flow.v[p];
        }
        for (std::size_t p = 0; p < inst.visible.size(); ++p) {
            if (!inst.visible[p]) continue;
            // Modal flow follows the visible winner; dropped projections
            // stay at the level's zero fill.
            fgt.modal.u[p] = of.valid[p] ? of.flow.u[p] : 0.0f;
            fgt.modal.v[p] = of.valid[p] ? of.flow.v[p] : 0.0f;
        }
    }
    return fgt;
}

namespace {

std::string frame_dir_name(int frame) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d", frame);
    return buf;
}

std::string inst_amodal_name(int id) {
    return "inst_" + std::to_string(id) + "_amodal.png";
}

void write_segmentation(const InstanceMaskSet& instances, const Raster<std::uint16_t>& winner,
                        const fs::path& dir) {
    write_png_gray16(winner, dir / "visible_ids.png");
    for (const Instance& inst : instances.instances)
        write_mask_png(inst.amodal, dir / inst_amodal_name(inst.id));
}

struct FrameManifest {
    int frame = 0;
    int num_levels = 1;
    bool has_flow = false;
    nlohmann::ordered_json objects = nlohmann::ordered_json::array();
};

FrameManifest describe(const InstanceMaskSet& instances, const OcclusionGraph& occlusion,
                       int frame, int num_levels, bool has_flow) {
    FrameManifest m;
    m.frame = frame;
    m.num_levels = num_levels;
    m.has_flow = has_flow;
    for (const Instance& inst : instances.instances) {
        nlohmann::ordered_json obj;
        obj["id"] = inst.id;
        obj["class"] = inst.class_label;
        obj["level"] = occlusion.levels.at(inst.id);
        obj["mean_depth"] = inst.mean_depth ? nlohmann::ordered_json(*inst.mean_depth)
                                            : nlohmann::ordered_json(nullptr);
        obj["visible_pixels"] = count_set(inst.visible);
        obj["amodal_pixels"] = count_set(inst.amodal);
        m.objects.push_back(std::move(obj));
    }
    return m;
}

// Segmentation-only ground truth for the last frame (no outgoing pair).
FrameManifest write_final_frame(const SceneSpec& scene, int frame, const fs::path& dir) {
    std::vector<Raster<float>> depths(scene.objects.size());
    for (std::size_t k = 0; k < scene.objects.size(); ++k)
        depths[k] = render_object_depth(scene.objects[k].shape, scene.objects[k].poses[frame],
                                        scene.camera_poses[frame], scene.camera);
    const Raster<float> bg =
        render_background_depth(scene.background, scene.camera_poses[frame], scene.camera);
    VisibilityResult vis = compose_visibility(scene.objects, depths, bg);

    std::vector<Raster<float>> present_depths;
    for (const Instance& inst : vis.instances.instances)
        for (std::size_t k = 0; k < scene.objects.size(); ++k)
            if (scene.objects[k].id == inst.id) {
                present_depths.push_back(depths[k]);
                break;
            }
    const OcclusionGraph occlusion = stratify(vis.instances, present_depths);

    write_segmentation(vis.instances, vis.winner, dir);
    return describe(vis.instances, occlusion, frame, 1 + occlusion.max_level(), false);
}

} // namespace

void generate(const SceneSpec& scene, const fs::path& out_dir, const GenerateOptions& options) {
    scene.validate();
    int frames = scene.frame_count;
    if (options.frame_override > 0) {
        if (options.frame_override > scene.frame_count)
            throw SceneError("frame override exceeds the poses stored in the scene");
        frames = options.frame_override;
    }
    if (frames < 2) throw SceneError("generation needs at least two frames");

    fs::create_directories(out_dir);

    std::vector<FrameManifest> manifests(frames);
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1) num_threads(par::max_threads())
    for (int t = 0; t < frames; ++t) {
        try {
            const fs::path final_dir = out_dir / frame_dir_name(t);
            const fs::path tmp_dir = out_dir / ("." + frame_dir_name(t) + ".tmp");
            fs::remove_all(tmp_dir);
            fs::create_directories(tmp_dir);

            if (t + 1 < frames) {
                FrameGroundTruth fgt = make_frame_ground_truth(scene, t);
                write_stack(fgt.stack, tmp_dir);
                write_flo(fgt.modal, tmp_dir / "modal.flo");
                write_segmentation(fgt.instances, fgt.visible_winner, tmp_dir);
                manifests[t] = describe(fgt.instances, fgt.occlusion, t,
                                        fgt.stack.num_levels(), true);
            } else {
                manifests[t] = write_final_frame(scene, t, tmp_dir);
            }

            fs::remove_all(final_dir);
            fs::rename(tmp_dir, final_dir);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    nlohmann::ordered_json doc;
    doc["width"] = scene.camera.width;
    doc["height"] = scene.camera.height;
    doc["frame_count"] = frames;
    doc["pair_count"] = frames - 1;
    doc["frames"] = nlohmann::ordered_json::array();
    for (const FrameManifest& m : manifests) {
        nlohmann::ordered_json jf;
        jf["frame"] = m.frame;
        jf["num_levels"] = m.num_levels;
        jf["has_flow"] = m.has_flow;
        jf["objects"] = m.objects;
        doc["frames"].push_back(std::move(jf));
    }
    std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write manifest.json");
    out << doc.dump(2) << "\n";

    AMFLOW_LOG_INFO("generated %d frames into %s", frames, out_dir.string().c_str());
}

} // namespace amflow::synth
