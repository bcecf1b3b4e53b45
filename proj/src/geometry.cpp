#include "cswarm/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cswarm {

Energy::Energy(double kev) : kev_(kev) {
  if (!(kev > 0.0) || !std::isfinite(kev))
    throw std::invalid_argument("energy must be finite and > 0 keV, got " + std::to_string(kev));
}

UnitVec3 UnitVec3::normalize(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  return UnitVec3(v / n);
}

Pose Pose::from_yaw(const Vec3& position, double yaw) {
  return Pose{position, Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()))};
}

double scattering_angle(Energy e_electron, Energy e_photon) {
  const double e_initial = e_electron.kev() + e_photon.kev();
  const double c = 1.0 + kElectronRestEnergyKeV * (1.0 / e_initial - 1.0 / e_photon.kev());
  // slack for rounding in exact forward/backward scatter pairs
  constexpr double kSlack = 1e-12;
  if (c < -1.0 - kSlack || c > 1.0 + kSlack)
    throw RejectedEvent("inconsistent energy pair: cos(theta) = " + std::to_string(c));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Energy photon_energy_after_scatter(Energy e_initial, double theta) {
  const double e = e_initial.kev();
  return Energy(e / (1.0 + (e / kElectronRestEnergyKeV) * (1.0 - std::cos(theta))));
}

ComptonCone cone_from_scatter(const ScatterPair& pair, const Pose& detector_pose) {
  const Vec3 local_axis = pair.c_electron - pair.c_photon;
  if (!(local_axis.norm() > 0.0))
    throw RejectedEvent("scatter pair has coincident electron and photon sites");
  const double theta = scattering_angle(pair.e_electron, pair.e_photon);
  return ComptonCone{detector_pose.apply(pair.c_electron),
                     UnitVec3::normalize(detector_pose.rotate(local_axis)), theta};
}

Vec3 any_perpendicular(const Vec3& unit) {
  Vec3 p = unit.cross(Vec3::UnitX());
  if (p.norm() < 1e-6)
    p = unit.cross(Vec3::UnitY());
  return p.normalized();
}

double angle_between(const Vec3& a, const Vec3& b) {
  // atan2 form stays accurate near 0 and pi
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

namespace {

// Decomposition of (point - apex) in the plane spanned by the axis and the
// point. `radial` is the in-plane unit direction perpendicular to the axis.
struct ConeFrame {
  Vec3 offset;
  double axial;
  double lateral;
  Vec3 radial;
};

ConeFrame cone_frame(const ComptonCone& cone, const Vec3& point) {
  const Vec3& u = cone.axis.vec();
  ConeFrame f;
  f.offset = point - cone.apex;
  f.axial = f.offset.dot(u);
  const Vec3 perp = f.offset - f.axial * u;
  f.lateral = perp.norm();
  // on the axis the plane is undefined; fall back to a fixed perpendicular
  f.radial = f.lateral > 1e-12 * f.offset.norm() ? Vec3(perp / f.lateral) : any_perpendicular(u);
  return f;
}

} // namespace

Vec3 project_point_onto_cone(const ComptonCone& cone, const Vec3& point) {
  const ConeFrame f = cone_frame(cone, point);
  if (f.offset.squaredNorm() == 0.0)
    return cone.apex;
  const double c = std::cos(cone.half_angle);
  const double s = std::sin(cone.half_angle);
  // w: the generator lying in the (axis, point) plane. Its dot product with
  // the offset is |offset| cos(beta), beta = alpha - half_angle.
  const Vec3 w = c * cone.axis.vec() + s * f.radial;
  const double along = f.axial * c + f.lateral * s;
  if (along <= 0.0)
    return cone.apex;
  return cone.apex + along * w;
}

double point_cone_surface_distance(const ComptonCone& cone, const Vec3& point) {
  const ConeFrame f = cone_frame(cone, point);
  const double c = std::cos(cone.half_angle);
  const double s = std::sin(cone.half_angle);
  if (f.axial * c + f.lateral * s <= 0.0)
    return f.offset.norm();
  return std::abs(f.lateral * c - f.axial * s);
}

double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi)
    r += kTwoPi;
  return r;
}

double angle_diff(double a, double b) { return wrap_angle(b - a); }

} // namespace cswarm
