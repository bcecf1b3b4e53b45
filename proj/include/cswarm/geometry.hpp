#pragma once

// Compton scattering kinematics and cone geometry.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <stdexcept>
#include <string>

namespace cswarm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Electron rest energy m_e c^2 in keV (CODATA 2018).
inline constexpr double kElectronRestEnergyKeV = 510.998950;

/// Raised when a measurement cannot be turned into a cone. The caller drops
/// the event and keeps going.
class RejectedEvent : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Deposited or photon energy in keV. Always strictly positive.
class Energy {
public:
  explicit Energy(double kev);
  double kev() const { return kev_; }

private:
  double kev_;
};

/// Direction vector with norm 1 (within 1e-12).
class UnitVec3 {
public:
  UnitVec3() : v_(Vec3::UnitX()) {}
  /// Normalizes `v`; throws std::invalid_argument on a zero or non-finite vector.
  static UnitVec3 normalize(const Vec3& v);

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  double operator[](int i) const { return v_[i]; }

private:
  explicit UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// Rigid placement of a detector (or body): maps local coordinates to world.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Vec3 apply(const Vec3& local) const { return position + orientation * local; }
  Vec3 rotate(const Vec3& local) const { return orientation * local; }

  /// Pose at `position` with a yaw rotation about world z.
  static Pose from_yaw(const Vec3& position, double yaw);
};

/// Both scattering products of one Compton event, in detector coordinates.
struct ScatterPair {
  Vec3 c_electron;
  Vec3 c_photon;
  Energy e_electron;
  Energy e_photon;
};

/// One-sided cone {apex + s d : s >= 0, angle(d, axis) = half_angle}.
struct ComptonCone {
  Vec3 apex = Vec3::Zero();
  UnitVec3 axis;
  double half_angle = kPi / 4.0;
};

/// Scattering angle from the two deposited energies. The incoming energy is
/// their sum. Throws RejectedEvent when the pair is kinematically impossible.
double scattering_angle(Energy e_electron, Energy e_photon);

/// Energy of the scattered photon for an incoming photon of `e_initial`
/// deflected by `theta`.
Energy photon_energy_after_scatter(Energy e_initial, double theta);

/// Cone of possible source directions for a scatter pair seen by a detector at
/// `detector_pose`. The apex is the electron site, the axis points from the
/// photon absorption site through the electron site.
ComptonCone cone_from_scatter(const ScatterPair& pair, const Pose& detector_pose);

/// Nearest point of the cone surface (apex included) to `point`.
Vec3 project_point_onto_cone(const ComptonCone& cone, const Vec3& point);

/// Euclidean distance from `point` to the one-sided cone surface.
double point_cone_surface_distance(const ComptonCone& cone, const Vec3& point);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Signed difference b - a wrapped to (-pi, pi].
double angle_diff(double a, double b);

/// Unit vector perpendicular to `unit`: unit x world-x, or unit x world-y when
/// `unit` is nearly parallel to x.
Vec3 any_perpendicular(const Vec3& unit);

/// Angle between two non-zero vectors in [0, pi].
double angle_between(const Vec3& a, const Vec3& b);

} // namespace cswarm
