#pragma once

#include <cmath>

#include "amflow/errors.hpp"

namespace amflow::synth {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

// Unit quaternion (w, x, y, z).
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    Quat conjugate() const { return {w, -x, -y, -z}; }

    Vec3 rotate(const Vec3& v) const {
        // q * (0, v) * q^-1 expanded via the double-cross identity.
        const Vec3 qv{x, y, z};
        const Vec3 t{2.0 * (qv.y * v.z - qv.z * v.y), 2.0 * (qv.z * v.x - qv.x * v.z),
                     2.0 * (qv.x * v.y - qv.y * v.x)};
        return {v.x + w * t.x + (qv.y * t.z - qv.z * t.y),
                v.y + w * t.y + (qv.z * t.x - qv.x * t.z),
                v.z + w * t.z + (qv.x * t.y - qv.y * t.x)};
    }

    static Quat from_axis_angle(const Vec3& axis, double angle) {
        const double n = axis.norm();
        const double s = std::sin(angle / 2.0) / n;
        return {std::cos(angle / 2.0), axis.x * s, axis.y * s, axis.z * s};
    }
};

// Rigid transform local -> parent: p' = R(q) * p + t.
struct RigidPose {
    Vec3 translation;
    Quat rotation;

    Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }
    Vec3 apply_inverse(const Vec3& p) const {
        return rotation.conjugate().rotate(p - translation);
    }
};

// Pinhole camera. Camera frame: +x right, +y down, +z forward (optical
// axis); pixel (x, y) covers [x, x+1) x [y, y+1) and rays pass through
// pixel centers (x + 0.5, y + 0.5).
struct CameraModel {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    void validate() const {
        if (width <= 0 || height <= 0) throw SceneError("camera resolution must be positive");
        if (!(fx > 0.0) || !(fy > 0.0)) throw SceneError("camera focal lengths must be positive");
        if (!(cx > 0.0) || cx >= width || !(cy > 0.0) || cy >= height)
            throw SceneError("camera principal point must lie inside the image");
    }

    // Direction of the ray through continuous image point (px, py),
    // parameterized so that ray parameter t equals camera-frame depth z.
    Vec3 ray_direction(double px, double py) const {
        return {(px - cx) / fx, (py - cy) / fy, 1.0};
    }

    // Continuous pixel coordinates of a camera-frame point (z > 0).
    void project(const Vec3& p, double& px, double& py) const {
        px = fx * p.x / p.z + cx;
        py = fy * p.y / p.z + cy;
    }
};

} // namespace amflow::synth
