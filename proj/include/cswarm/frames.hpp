#pragma once

// Rigid transforms between agent coordinate frames.

#include "cswarm/detector.hpp"
#include "cswarm/geometry.hpp"

namespace cswarm {

/// p_to = rotation * p_from + translation.
struct FrameTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  int from_frame = 0;
  int to_frame = 0;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }
  /// Heading (yaw about z) expressed in the target frame.
  double apply_heading(double heading) const;

  FrameTransform inverse() const;
  /// First this, then `next`.
  FrameTransform then(const FrameTransform& next) const;

  /// Yaw rotation about z followed by a translation.
  static FrameTransform yaw_offset(double yaw, const Vec3& translation, int from_frame,
                                   int to_frame);
};

ComptonCone transform_cone(const ComptonCone& cone, const FrameTransform& T);

/// Maps the cone into T's target frame; the half-angle is untouched.
MeasurementEvent transform_measurement(const MeasurementEvent& event, const FrameTransform& T);

} // namespace cswarm
