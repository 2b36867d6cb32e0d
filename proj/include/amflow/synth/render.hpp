#pragma once

#include "amflow/raster.hpp"
#include "amflow/synth/scene.hpp"

namespace amflow::synth {

// Amodal depth of one object, ignoring all other geometry: analytic
// ray-primitive intersection at pixel centers. Values are camera-frame
// z depths; +inf where the ray misses.
Raster<float> render_object_depth(const ShapeSpec& shape, const RigidPose& object_pose,
                                  const RigidPose& camera_pose, const CameraModel& camera);

// Depth of the static background (ground plane and/or far sphere);
// guaranteed finite when the camera sits inside the far sphere.
Raster<float> render_background_depth(const BackgroundSpec& background,
                                      const RigidPose& camera_pose, const CameraModel& camera);

// Single-ray variants used by the flow kernels.
double intersect_shape(const ShapeSpec& shape, const Vec3& origin, const Vec3& dir);
double intersect_background(const BackgroundSpec& background, const Vec3& origin,
                            const Vec3& dir);

} // namespace amflow::synth
