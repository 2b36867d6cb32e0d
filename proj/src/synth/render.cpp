#include "amflow/synth/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amflow/parallel.hpp"

namespace amflow::synth {

namespace {

constexpr double kMiss = std::numeric_limits<double>::infinity();
constexpr double kMinHit = 1e-9;

double ray_sphere(double radius, const Vec3& o, const Vec3& d) {
    const double a = d.dot(d);
    const double b = 2.0 * o.dot(d);
    const double c = o.dot(o) - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return kMiss;
    const double sq = std::sqrt(disc);
    const double t0 = (-b - sq) / (2.0 * a);
    const double t1 = (-b + sq) / (2.0 * a);
    if (t0 > kMinHit) return t0;
    if (t1 > kMinHit) return t1;
    return kMiss;
}

double ray_box(double hx, double hy, double hz, const Vec3& o, const Vec3& d) {
    double t_near = -kMiss, t_far = kMiss;
    const double half[3] = {hx, hy, hz};
    const double od[3] = {o.x, o.y, o.z};
    const double dd[3] = {d.x, d.y, d.z};
    for (int axis = 0; axis < 3; ++axis) {
        if (dd[axis] == 0.0) {
            if (std::abs(od[axis]) > half[axis]) return kMiss;
            continue;
        }
        double t0 = (-half[axis] - od[axis]) / dd[axis];
        double t1 = (half[axis] - od[axis]) / dd[axis];
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return kMiss;
    }
    if (t_near > kMinHit) return t_near;
    if (t_far > kMinHit) return t_far;
    return kMiss;
}

double ray_quad(double hx, double hy, const Vec3& o, const Vec3& d) {
    if (d.z == 0.0) return kMiss;
    const double t = -o.z / d.z;
    if (t <= kMinHit) return kMiss;
    const double px = o.x + t * d.x;
    const double py = o.y + t * d.y;
    if (std::abs(px) > hx || std::abs(py) > hy) return kMiss;
    return t;
}

// Ground plane y = g in world coordinates (+y is down).
double ray_ground(double g, const Vec3& o, const Vec3& d) {
    if (d.y == 0.0) return kMiss;
    const double t = (g - o.y) / d.y;
    return t > kMinHit ? t : kMiss;
}

double ray_far_sphere(double radius, const Vec3& o, const Vec3& d) {
    return ray_sphere(radius, o, d);
}

} // namespace

double intersect_shape(const ShapeSpec& shape, const Vec3& o, const Vec3& d) {
    switch (shape.kind) {
        case ShapeKind::kBox:
            return ray_box(shape.size_x / 2.0, shape.size_y / 2.0, shape.size_z / 2.0, o, d);
        case ShapeKind::kSphere:
            return ray_sphere(shape.radius, o, d);
        case ShapeKind::kQuad:
            return ray_quad(shape.size_x / 2.0, shape.size_y / 2.0, o, d);
    }
    return kMiss;
}

double intersect_background(const BackgroundSpec& bg, const Vec3& o, const Vec3& d) {
    double t = ray_far_sphere(bg.far_distance, o, d);
    if (bg.ground_height)
        t = std::min(t, ray_ground(*bg.ground_height, o, d));
    return t;
}

Raster<float> render_object_depth(const ShapeSpec& shape, const RigidPose& object_pose,
                                  const RigidPose& camera_pose, const CameraModel& camera) {
    shape.validate();
    camera.validate();

    Raster<float> depth(camera.width, camera.height,
                        std::numeric_limits<float>::infinity());

    // Camera-frame ray transformed once into the object's local frame;
    // rotations preserve the z-depth parameterization of t.
    const Vec3 origin_local = object_pose.apply_inverse(camera_pose.translation);
    const Quat cam_to_local_rot = [&] {
        // Compose conj(q_obj) * q_cam as a single rotation of ray directions.
        Quat qo = object_pose.rotation.conjugate();
        Quat qc = camera_pose.rotation;
        return Quat{qo.w * qc.w - qo.x * qc.x - qo.y * qc.y - qo.z * qc.z,
                    qo.w * qc.x + qo.x * qc.w + qo.y * qc.z - qo.z * qc.y,
                    qo.w * qc.y - qo.x * qc.z + qo.y * qc.w + qo.z * qc.x,
                    qo.w * qc.z + qo.x * qc.y - qo.y * qc.x + qo.z * qc.w};
    }();

#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const Vec3 d_cam = camera.ray_direction(x + 0.5, y + 0.5);
            const Vec3 d_local = cam_to_local_rot.rotate(d_cam);
            const double t = intersect_shape(shape, origin_local, d_local);
            if (t != kMiss) depth.at(x, y) = static_cast<float>(t);
        }
    }
    return depth;
}

Raster<float> render_background_depth(const BackgroundSpec& background,
                                      const RigidPose& camera_pose, const CameraModel& camera) {
    camera.validate();
    Raster<float> depth(camera.width, camera.height,
                        std::numeric_limits<float>::infinity());

#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            const Vec3 d_cam = camera.ray_direction(x + 0.5, y + 0.5);
            const Vec3 d_world = camera_pose.rotation.rotate(d_cam);
            const double t = intersect_background(background, camera_pose.translation, d_world);
            if (t != kMiss) depth.at(x, y) = static_cast<float>(t);
        }
    }
    return depth;
}

} // namespace amflow::synth
