#include "amflow/synth/scene.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace amflow::synth {

namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw FormatError(std::string("scene: ") + what + " must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Quat parse_quat(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 4)
        throw FormatError(std::string("scene: ") + what + " must be a 4-element array [w,x,y,z]");
    Quat q{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (std::abs(q.norm() - 1.0) > 1e-9)
        throw SceneError("scene: quaternion must be unit length (|norm - 1| <= 1e-9)");
    return q.normalized();
}

RigidPose parse_pose(const json& j) {
    if (!j.is_object() || !j.contains("t") || !j.contains("q"))
        throw FormatError("scene: pose must be an object with fields t and q");
    return {parse_vec3(j.at("t"), "pose translation"), parse_quat(j.at("q"), "pose rotation")};
}

std::vector<RigidPose> parse_poses(const json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string("scene: ") + what + " must be an array");
    std::vector<RigidPose> poses;
    poses.reserve(j.size());
    for (const json& p : j) poses.push_back(parse_pose(p));
    return poses;
}

ShapeSpec parse_shape(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw FormatError("scene: shape must be an object with a type field");
    const std::string type = j.at("type").get<std::string>();
    ShapeSpec shape;
    if (type == "box") {
        shape.kind = ShapeKind::kBox;
        const json& size = j.at("size");
        if (!size.is_array() || size.size() != 3)
            throw FormatError("scene: box size must be [w,h,d]");
        shape.size_x = size[0].get<double>();
        shape.size_y = size[1].get<double>();
        shape.size_z = size[2].get<double>();
    } else if (type == "sphere") {
        shape.kind = ShapeKind::kSphere;
        shape.radius = j.at("radius").get<double>();
    } else if (type == "quad") {
        shape.kind = ShapeKind::kQuad;
        const json& size = j.at("size");
        if (!size.is_array() || size.size() != 2)
            throw FormatError("scene: quad size must be [w,h]");
        shape.size_x = size[0].get<double>();
        shape.size_y = size[1].get<double>();
    } else {
        throw FormatError("scene: unknown shape type '" + type + "'");
    }
    shape.validate();
    return shape;
}

} // namespace

void ShapeSpec::validate() const {
    switch (kind) {
        case ShapeKind::kBox:
            if (!(size_x > 0.0) || !(size_y > 0.0) || !(size_z > 0.0))
                throw SceneError("scene: box extents must be positive");
            break;
        case ShapeKind::kSphere:
            if (!(radius > 0.0)) throw SceneError("scene: sphere radius must be positive");
            break;
        case ShapeKind::kQuad:
            if (!(size_x > 0.0) || !(size_y > 0.0))
                throw SceneError("scene: quad extents must be positive");
            break;
    }
}

void SceneSpec::validate() const {
    camera.validate();
    if (frame_count < 1) throw SceneError("scene: frame count must be positive");
    if (static_cast<int>(camera_poses.size()) != frame_count)
        throw SceneError("scene: camera needs one pose per frame");
    std::set<int> ids;
    for (const ObjectSpec& obj : objects) {
        if (obj.id < 1 || obj.id > 65535)
            throw SceneError("scene: object ids must be in [1, 65535]");
        if (!ids.insert(obj.id).second) throw SceneError("scene: duplicate object id");
        if (static_cast<int>(obj.poses.size()) != frame_count)
            throw SceneError("scene: every object needs one pose per frame");
        obj.shape.validate();
    }
    if (!(background.far_distance > 0.0))
        throw SceneError("scene: far distance must be positive");
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file " + path.string());

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("scene: invalid JSON in " + path.string() + ": " + e.what());
    }

    try {
        SceneSpec scene;
        const json& cam = doc.at("camera");
        scene.camera.fx = cam.at("fx").get<double>();
        scene.camera.fy = cam.at("fy").get<double>();
        scene.camera.cx = cam.at("cx").get<double>();
        scene.camera.cy = cam.at("cy").get<double>();
        scene.camera.width = cam.at("width").get<int>();
        scene.camera.height = cam.at("height").get<int>();

        scene.camera_poses = parse_poses(doc.at("camera_poses"), "camera_poses");

        for (const json& jobj : doc.at("objects")) {
            ObjectSpec obj;
            obj.id = jobj.at("id").get<int>();
            if (jobj.contains("class")) obj.class_label = jobj.at("class").get<std::string>();
            obj.shape = parse_shape(jobj.at("shape"));
            obj.poses = parse_poses(jobj.at("poses"), "object poses");
            scene.objects.push_back(std::move(obj));
        }

        if (doc.contains("background")) {
            const json& bg = doc.at("background");
            if (bg.contains("ground_height") && !bg.at("ground_height").is_null())
                scene.background.ground_height = bg.at("ground_height").get<double>();
            if (bg.contains("far_distance"))
                scene.background.far_distance = bg.at("far_distance").get<double>();
        }

        scene.frame_count = doc.at("frames").get<int>();
        scene.validate();
        return scene;
    } catch (const json::exception& e) {
        throw FormatError("scene: bad schema in " + path.string() + ": " + e.what());
    }
}

} // namespace amflow::synth
