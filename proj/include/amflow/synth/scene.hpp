#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "amflow/synth/geometry.hpp"

namespace amflow::synth {

enum class ShapeKind { kBox, kSphere, kQuad };

// Rigid primitive in its local frame, centered at the origin:
//   box: extents size_x/y/z; sphere: radius; quad: size_x by size_y
//   rectangle in the local z = 0 plane.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::kBox;
    double size_x = 1.0;
    double size_y = 1.0;
    double size_z = 1.0;
    double radius = 1.0;

    void validate() const;
};

struct ObjectSpec {
    int id = 0;
    std::string class_label = "object";
    ShapeSpec shape;
    std::vector<RigidPose> poses; // one per frame, local -> world
};

// Static world geometry behind all objects: an optional horizontal ground
// plane (world y = ground_height, +y pointing down) plus a far sphere of
// radius far_distance around the world origin, so every ray terminates.
struct BackgroundSpec {
    std::optional<double> ground_height;
    double far_distance = 500.0;
};

struct SceneSpec {
    CameraModel camera;
    std::vector<RigidPose> camera_poses; // camera -> world, one per frame
    std::vector<ObjectSpec> objects;
    BackgroundSpec background;
    int frame_count = 0;

    void validate() const;
};

// Parses the JSON scene description (see README for the schema).
SceneSpec load_scene(const std::filesystem::path& path);

} // namespace amflow::synth
