#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include "amflow/metrics/evaluate.hpp"
#include "amflow/stack_io.hpp"
#include "amflow/synth/generate.hpp"
#include "amflow/synth/render.hpp"
#include "amflow/synth/scene.hpp"
#include "test_util.hpp"

using namespace amflow;
using namespace amflow::synth;

namespace {

CameraModel test_camera(int w = 128, int h = 96, double f = 100.0) {
    return CameraModel{f, f, w / 2.0, h / 2.0, w, h};
}

RigidPose pose_at(double x, double y, double z) { return RigidPose{{x, y, z}, Quat{}}; }

ObjectSpec quad_object(int id, double w, double h, std::vector<RigidPose> poses) {
    ObjectSpec obj;
    obj.id = id;
    obj.shape.kind = ShapeKind::kQuad;
    obj.shape.size_x = w;
    obj.shape.size_y = h;
    obj.poses = std::move(poses);
    return obj;
}

SceneSpec translation_scene() {
    // Fronto-parallel quad at z = 10 moving 1 m in +x per frame; fx = 100.
    SceneSpec scene;
    scene.camera = test_camera();
    scene.camera_poses = {pose_at(0, 0, 0), pose_at(0, 0, 0)};
    scene.objects = {quad_object(1, 1.2, 0.8, {pose_at(0, 0, 10), pose_at(1, 0, 10)})};
    scene.background.far_distance = 200.0;
    scene.frame_count = 2;
    return scene;
}

} // namespace

TEST_CASE("ray-sphere depth at the principal point") {
    // Half-pixel centers: cx at 64.5 puts pixel (64, 48) exactly on axis.
    CameraModel cam{100.0, 100.0, 64.5, 48.5, 128, 96};
    ShapeSpec sphere;
    sphere.kind = ShapeKind::kSphere;
    sphere.radius = 1.0;
    const Raster<float> depth =
        render_object_depth(sphere, pose_at(0, 0, 10), RigidPose{}, cam);
    CHECK(depth.at(64, 48) == 9.0f);
    CHECK(std::isinf(depth.at(0, 0)));
}

TEST_CASE("object behind the camera renders nothing") {
    ShapeSpec sphere;
    sphere.kind = ShapeKind::kSphere;
    sphere.radius = 1.0;
    const Raster<float> depth =
        render_object_depth(sphere, pose_at(0, 0, -10), RigidPose{}, test_camera());
    for (std::size_t i = 0; i < depth.size(); ++i) CHECK(std::isinf(depth[i]));
}

TEST_CASE("fronto-parallel quad has constant depth") {
    const CameraModel cam = test_camera();
    ShapeSpec quad;
    quad.kind = ShapeKind::kQuad;
    quad.size_x = 2.0;
    quad.size_y = 1.0;
    const Raster<float> depth = render_object_depth(quad, pose_at(0, 0, 5), RigidPose{}, cam);
    std::uint64_t hits = 0;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (!std::isfinite(depth[i])) continue;
        CHECK(depth[i] == 5.0f);
        ++hits;
    }
    // 2m x 1m at z=5 with f=100 projects to a 40 x 20 pixel rectangle.
    CHECK(hits == 40 * 20);
}

TEST_CASE("degenerate shapes are rejected") {
    ShapeSpec bad;
    bad.kind = ShapeKind::kBox;
    bad.size_y = 0.0;
    CHECK_THROWS_AS(render_object_depth(bad, pose_at(0, 0, 5), RigidPose{}, test_camera()),
                    SceneError);
}

TEST_CASE("compose_visibility") {
    const CameraModel cam = test_camera();
    std::vector<ObjectSpec> objects = {
        quad_object(1, 1.0, 1.0, {pose_at(-0.8, 0, 5)}),
        quad_object(2, 1.0, 1.0, {pose_at(0, 0, 8)}),
    };
    std::vector<Raster<float>> depths = {
        render_object_depth(objects[0].shape, objects[0].poses[0], RigidPose{}, cam),
        render_object_depth(objects[1].shape, objects[1].poses[0], RigidPose{}, cam),
    };
    BackgroundSpec bg;
    const Raster<float> bg_depth = render_background_depth(bg, RigidPose{}, cam);

    const VisibilityResult vis = compose_visibility(objects, depths, bg_depth);
    REQUIRE(vis.instances.instances.size() == 2);
    const Instance& front = vis.instances.instances[0];
    const Instance& behind = vis.instances.instances[1];

    SUBCASE("front object fully visible") {
        CHECK(front.visible == front.amodal);
    }

    SUBCASE("occluded object loses exactly the overlap") {
        std::uint64_t overlap = 0;
        for (std::size_t p = 0; p < front.amodal.size(); ++p) {
            overlap += static_cast<std::uint64_t>(front.amodal[p] & behind.amodal[p]);
            CHECK(behind.visible[p] == (behind.amodal[p] && !front.amodal[p] ? 1 : 0));
        }
        CHECK(overlap > 0);
        CHECK(count_set(behind.visible) == count_set(behind.amodal) - overlap);
    }

    SUBCASE("winners agree with the visible masks") {
        for (std::size_t p = 0; p < front.visible.size(); ++p) {
            if (front.visible[p]) CHECK(vis.winner[p] == 1);
            if (behind.visible[p]) CHECK(vis.winner[p] == 2);
        }
    }

    SUBCASE("exact depth ties go to the lower id") {
        std::vector<ObjectSpec> tied = {
            quad_object(7, 1.0, 1.0, {pose_at(0, 0, 5)}),
            quad_object(3, 1.0, 1.0, {pose_at(0, 0, 5)}),
        };
        std::vector<Raster<float>> tied_depths = {
            render_object_depth(tied[0].shape, tied[0].poses[0], RigidPose{}, cam),
            render_object_depth(tied[1].shape, tied[1].poses[0], RigidPose{}, cam),
        };
        const VisibilityResult tv = compose_visibility(tied, tied_depths, bg_depth);
        for (std::size_t p = 0; p < tv.winner.size(); ++p)
            if (tv.winner[p] != 0) CHECK(tv.winner[p] == 3);
    }
}

TEST_CASE("object_flow analytic cases") {
    const CameraModel cam = test_camera();

    SUBCASE("fronto-parallel translation: f * dx / z pixels") {
        const ObjectSpec obj = quad_object(1, 1.2, 0.8, {pose_at(0, 0, 10), pose_at(1, 0, 10)});
        const Raster<float> depth =
            render_object_depth(obj.shape, obj.poses[0], RigidPose{}, cam);
        const ObjectFlowResult r =
            object_flow(obj.poses[0], obj.poses[1], RigidPose{}, RigidPose{}, depth, cam);
        std::uint64_t checked = 0;
        for (std::size_t p = 0; p < r.valid.size(); ++p) {
            if (!r.valid[p]) continue;
            CHECK(r.flow.u[p] == doctest::Approx(10.0).epsilon(1e-9));
            CHECK(std::abs(r.flow.v[p]) < 1e-6);
            ++checked;
        }
        CHECK(checked > 0);
    }

    SUBCASE("identity motion gives zero flow") {
        const ObjectSpec obj = quad_object(1, 1.0, 1.0, {pose_at(0.3, -0.2, 7)});
        const Raster<float> depth =
            render_object_depth(obj.shape, obj.poses[0], RigidPose{}, cam);
        const ObjectFlowResult r =
            object_flow(obj.poses[0], obj.poses[0], RigidPose{}, RigidPose{}, depth, cam);
        for (std::size_t p = 0; p < r.valid.size(); ++p) {
            if (!r.valid[p]) continue;
            CHECK(r.flow.u[p] == 0.0f);
            CHECK(r.flow.v[p] == 0.0f);
        }
    }

    SUBCASE("camera translation: u = -fx * tx / z") {
        const ObjectSpec obj = quad_object(1, 1.5, 1.0, {pose_at(0, 0, 10), pose_at(0, 0, 10)});
        const Raster<float> depth =
            render_object_depth(obj.shape, obj.poses[0], RigidPose{}, cam);
        const RigidPose cam_t1 = pose_at(0.5, 0, 0);
        const ObjectFlowResult r =
            object_flow(obj.poses[0], obj.poses[1], RigidPose{}, cam_t1, depth, cam);
        for (std::size_t p = 0; p < r.valid.size(); ++p) {
            if (!r.valid[p]) continue;
            CHECK(r.flow.u[p] == doctest::Approx(-100.0 * 0.5 / 10.0).epsilon(1e-9));
        }
    }

    SUBCASE("points moved behind the camera are dropped") {
        const ObjectSpec obj = quad_object(1, 1.0, 1.0, {pose_at(0, 0, 5), pose_at(0, 0, -5)});
        const Raster<float> depth =
            render_object_depth(obj.shape, obj.poses[0], RigidPose{}, cam);
        const ObjectFlowResult r =
            object_flow(obj.poses[0], obj.poses[1], RigidPose{}, RigidPose{}, depth, cam);
        CHECK(count_set(r.valid) == 0);
    }
}

TEST_CASE("background flow analytic cases") {
    const CameraModel cam = test_camera();
    BackgroundSpec bg;
    bg.ground_height = 1.5;
    bg.far_distance = 300.0;

    SUBCASE("static camera gives a zero field") {
        const FlowField f = background_flow(RigidPose{}, RigidPose{}, bg, cam);
        for (std::size_t p = 0; p < f.size(); ++p) {
            CHECK(f.u[p] == 0.0f);
            CHECK(f.v[p] == 0.0f);
        }
    }

    SUBCASE("forward motion expands radially from the principal point") {
        const FlowField f = background_flow(pose_at(0, 0, 0), pose_at(0, 0, 1.0), bg, cam);
        const int cx = cam.width / 2, cy = cam.height / 2;
        // Probe one pixel per quadrant: flow points away from the center.
        const std::array<std::pair<int, int>, 4> probes = {
            {{10, 10}, {cam.width - 10, 10}, {10, cam.height - 10},
             {cam.width - 10, cam.height - 10}}};
        for (const auto& [x, y] : probes) {
            const std::size_t i = f.index(x, y);
            CHECK(f.u[i] * (x - cx) > 0.0f);
            CHECK(f.v[i] * (y - cy) > 0.0f);
        }
    }

    SUBCASE("roll about the optical axis matches the in-plane rotation field") {
        const double theta = 0.02;
        RigidPose rolled;
        rolled.rotation = Quat::from_axis_angle({0, 0, 1}, theta);
        const FlowField f = background_flow(RigidPose{}, rolled, bg, cam);
        for (int y = 8; y < cam.height; y += 40) {
            for (int x = 8; x < cam.width; x += 40) {
                const double px = x + 0.5 - cam.cx, py = y + 0.5 - cam.cy;
                // Camera roll by theta rotates image content by -theta.
                const double expected_u = (std::cos(theta) * px + std::sin(theta) * py) - px;
                const double expected_v = (-std::sin(theta) * px + std::cos(theta) * py) - py;
                const std::size_t i = f.index(x, y);
                CHECK(f.u[i] == doctest::Approx(expected_u).epsilon(1e-6));
                CHECK(f.v[i] == doctest::Approx(expected_v).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("generate end to end") {
    testutil::TempDir tmp;

    SUBCASE("single moving object: two levels, constant level-1 flow") {
        const SceneSpec scene = translation_scene();
        const FrameGroundTruth fgt = make_frame_ground_truth(scene, 0);
        CHECK(fgt.stack.num_levels() == 2);
        std::uint64_t on = 0;
        for (std::size_t p = 0; p < fgt.stack.levels[1].mask.size(); ++p) {
            if (!fgt.stack.levels[1].mask[p]) continue;
            CHECK(fgt.stack.levels[1].flow.u[p] == doctest::Approx(10.0).epsilon(1e-9));
            ++on;
        }
        CHECK(on == 12 * 8); // 1.2m x 0.8m at z=10, f=100

        generate(scene, tmp.path / "out");
        const LayeredFlowStack stack = read_stack(tmp.path / "out" / "frame_000000");
        CHECK(stack == fgt.stack);
        CHECK(std::filesystem::exists(tmp.path / "out" / "manifest.json"));
        CHECK(std::filesystem::exists(tmp.path / "out" / "frame_000001" / "visible_ids.png"));
    }

    SUBCASE("occlusion chain of three quads yields four levels") {
        SceneSpec scene;
        scene.camera = test_camera();
        scene.camera_poses = {pose_at(0, 0, 0), pose_at(0, 0, 0)};
        scene.objects = {
            quad_object(1, 1.0, 1.0, {pose_at(-0.25, 0, 4), pose_at(-0.25, 0, 4)}),
            quad_object(2, 1.0, 1.0, {pose_at(0.0, 0, 5), pose_at(0.0, 0, 5)}),
            quad_object(3, 1.0, 1.0, {pose_at(0.25, 0, 6), pose_at(0.25, 0, 6)}),
        };
        scene.frame_count = 2;
        const FrameGroundTruth fgt = make_frame_ground_truth(scene, 0);
        CHECK(fgt.stack.num_levels() == 4);
        CHECK(fgt.occlusion.levels.at(1) == 1);
        CHECK(fgt.occlusion.levels.at(2) == 2);
        CHECK(fgt.occlusion.levels.at(3) == 3);
    }

    SUBCASE("self-evaluation of generated ground truth is exactly 1") {
        const SceneSpec scene = translation_scene();
        const FrameGroundTruth fgt = make_frame_ground_truth(scene, 0);
        const metrics::EvalReport report = metrics::evaluate_stack(fgt.stack, fgt.stack);
        CHECK(report.afq == 1.0);
    }

    SUBCASE("modal flow equals the visible winner's level flow everywhere") {
        SceneSpec scene = translation_scene();
        scene.objects.push_back(
            quad_object(2, 0.6, 0.6, {pose_at(0.2, 0, 6), pose_at(0.2, 0.1, 6)}));
        const FrameGroundTruth fgt = make_frame_ground_truth(scene, 0);
        for (std::size_t p = 0; p < fgt.modal.size(); ++p) {
            const int winner = fgt.visible_winner[p];
            int level = 0;
            if (winner != 0) level = fgt.occlusion.levels.at(winner);
            CHECK(fgt.modal.u[p] == fgt.stack.levels[level].flow.u[p]);
            CHECK(fgt.modal.v[p] == fgt.stack.levels[level].flow.v[p]);
        }
    }

    SUBCASE("within one level amodal masks never overlap") {
        SceneSpec scene = translation_scene();
        scene.objects.push_back(
            quad_object(2, 0.8, 0.6, {pose_at(-1.2, 0, 10), pose_at(-1.2, 0, 10)}));
        const FrameGroundTruth fgt = make_frame_ground_truth(scene, 0);
        std::map<int, std::vector<const Instance*>> by_level;
        for (std::size_t k = 0; k < fgt.instances.instances.size(); ++k)
            by_level[fgt.occlusion.levels.at(fgt.instances.instances[k].id)].push_back(
                &fgt.instances.instances[k]);
        for (const auto& [level, members] : by_level)
            for (std::size_t a = 0; a < members.size(); ++a)
                for (std::size_t b = a + 1; b < members.size(); ++b)
                    for (std::size_t p = 0; p < members[a]->amodal.size(); ++p)
                        CHECK_FALSE(bool(members[a]->amodal[p] && members[b]->amodal[p]));
    }

    SUBCASE("time reversal negates constant flows") {
        SceneSpec forward = translation_scene();
        SceneSpec reversed = forward;
        std::reverse(reversed.camera_poses.begin(), reversed.camera_poses.end());
        for (ObjectSpec& obj : reversed.objects)
            std::reverse(obj.poses.begin(), obj.poses.end());
        const FrameGroundTruth f = make_frame_ground_truth(forward, 0);
        const FrameGroundTruth r = make_frame_ground_truth(reversed, 0);
        // Constant fields: compare the values on the respective masks.
        float fu = 0.0f, ru = 0.0f;
        for (std::size_t p = 0; p < f.stack.levels[1].mask.size(); ++p)
            if (f.stack.levels[1].mask[p]) fu = f.stack.levels[1].flow.u[p];
        for (std::size_t p = 0; p < r.stack.levels[1].mask.size(); ++p)
            if (r.stack.levels[1].mask[p]) ru = r.stack.levels[1].flow.u[p];
        CHECK(fu == doctest::Approx(10.0).epsilon(1e-9));
        CHECK(ru == doctest::Approx(-10.0).epsilon(1e-9));
    }

    SUBCASE("generated stacks round trip bit-exactly") {
        const SceneSpec scene = translation_scene();
        generate(scene, tmp.path / "rt");
        const LayeredFlowStack a = read_stack(tmp.path / "rt" / "frame_000000");
        write_stack(a, tmp.path / "copy");
        CHECK(read_stack(tmp.path / "copy") == a);
    }

    SUBCASE("frame override is honored and validated") {
        SceneSpec scene = translation_scene();
        scene.camera_poses.push_back(pose_at(0, 0, 0));
        scene.objects[0].poses.push_back(pose_at(2, 0, 10));
        scene.frame_count = 3;
        GenerateOptions options;
        options.frame_override = 2;
        generate(scene, tmp.path / "short", options);
        CHECK(std::filesystem::exists(tmp.path / "short" / "frame_000001"));
        CHECK_FALSE(std::filesystem::exists(tmp.path / "short" / "frame_000002"));

        options.frame_override = 9;
        CHECK_THROWS_AS(generate(scene, tmp.path / "bad", options), SceneError);
    }
}

TEST_CASE("scene loading validation") {
    testutil::TempDir tmp;

    SUBCASE("invalid JSON") {
        std::ofstream(tmp.path / "bad.json") << "{ nope";
        CHECK_THROWS_AS(load_scene(tmp.path / "bad.json"), FormatError);
    }

    SUBCASE("missing poses") {
        std::ofstream(tmp.path / "s.json") << R"({
            "camera": {"fx":100,"fy":100,"cx":64,"cy":48,"width":128,"height":96},
            "camera_poses": [{"t":[0,0,0],"q":[1,0,0,0]}],
            "objects": [], "frames": 2})";
        CHECK_THROWS_AS(load_scene(tmp.path / "s.json"), SceneError);
    }

    SUBCASE("non-unit quaternion") {
        std::ofstream(tmp.path / "q.json") << R"({
            "camera": {"fx":100,"fy":100,"cx":64,"cy":48,"width":128,"height":96},
            "camera_poses": [{"t":[0,0,0],"q":[1,0.5,0,0]}],
            "objects": [], "frames": 1})";
        CHECK_THROWS_AS(load_scene(tmp.path / "q.json"), SceneError);
    }
}
