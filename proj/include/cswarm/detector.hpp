#pragma once

// Synthetic Compton camera: event rates, Poisson detection timing and cone
// synthesis around the true source direction.

#include "cswarm/geometry.hpp"

#include <functional>
#include <random>
#include <vector>

namespace cswarm {

using Rng = std::mt19937_64;

struct SourceState {
  Vec3 position = Vec3::Zero();
  double activity = 3e9; ///< Bq
  Vec3 velocity = Vec3::Zero();
};

struct DetectorConfig {
  double sensitive_area = 0.014 * 0.014; ///< m^2, 14 mm x 14 mm chip
  double intrinsic_efficiency = 0.01;
  double fov_half_angle = kPi;          ///< about the mount axis
  double angular_noise_sigma = 0.05;    ///< rad, applied to the half-angle
  double min_theta = 10.0 * kPi / 180.0;
  double max_theta = 80.0 * kPi / 180.0;
  double rate_cap = 50.0;               ///< events/s
  Vec3 mount_axis = Vec3::UnitX();      ///< body frame

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Forward hemisphere field of view (fov_half_angle = pi/2).
  static DetectorConfig forward_hemisphere();
};

struct MeasurementEvent {
  double time = 0.0;
  ComptonCone cone;
  int agent_id = 0;
  int frame_id = 0;
};

/// Mean detection rate (events/s) of a point source seen by one detector:
/// inverse-square flux through the cosine-projected chip area, zero outside
/// the field of view, capped at `cfg.rate_cap`.
double expected_event_rate(const SourceState& source, const Pose& detector_pose,
                           const DetectorConfig& cfg);

/// Event times in [t0, t0 + dt) for a constant rate over the step.
std::vector<double> sample_step_detections(double rate, double t0, double dt, Rng& rng);

/// Inhomogeneous Poisson sampling over [0, horizon) with a piecewise constant
/// rate evaluated at the start of each step of length dt.
std::vector<double> sample_detections(const std::function<double(double)>& rate, double dt,
                                      double horizon, Rng& rng);

/// Same, with the rate derived from source and detector trajectories.
std::vector<double> sample_detections(const std::function<SourceState(double)>& source_traj,
                                      const std::function<Pose(double)>& detector_traj,
                                      const DetectorConfig& cfg, double dt, double horizon,
                                      Rng& rng);

/// Draws a cone whose noiseless surface contains the direction from the
/// detector to `true_source`. The half-angle carries Gaussian noise.
ComptonCone synthesize_cone(const Vec3& true_source, const Pose& detector_pose,
                            const DetectorConfig& cfg, Rng& rng);

} // namespace cswarm
