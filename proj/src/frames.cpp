#include "cswarm/frames.hpp"

#include <cmath>

namespace cswarm {

double FrameTransform::apply_heading(double heading) const {
  const Vec3 d = rotation * Vec3(std::cos(heading), std::sin(heading), 0.0);
  return std::atan2(d.y(), d.x());
}

FrameTransform FrameTransform::inverse() const {
  FrameTransform inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  inv.from_frame = to_frame;
  inv.to_frame = from_frame;
  return inv;
}

FrameTransform FrameTransform::then(const FrameTransform& next) const {
  FrameTransform out;
  out.rotation = (next.rotation * rotation).normalized();
  out.translation = next.rotation * translation + next.translation;
  out.from_frame = from_frame;
  out.to_frame = next.to_frame;
  return out;
}

FrameTransform FrameTransform::yaw_offset(double yaw, const Vec3& translation, int from_frame,
                                          int to_frame) {
  return FrameTransform{Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())), translation, from_frame,
                        to_frame};
}

ComptonCone transform_cone(const ComptonCone& cone, const FrameTransform& T) {
  return ComptonCone{T.apply(cone.apex), UnitVec3::normalize(T.rotate(cone.axis.vec())),
                     cone.half_angle};
}

MeasurementEvent transform_measurement(const MeasurementEvent& event, const FrameTransform& T) {
  MeasurementEvent out = event;
  out.cone = transform_cone(event.cone, T);
  out.frame_id = T.to_frame;
  return out;
}

} // namespace cswarm
