#pragma once

// Point-mass vehicle with a saturating PD trajectory tracker. Stands in for
// a model-predictive tracker: it turns discontinuous reference trajectories
// into motion that respects speed, acceleration and yaw-rate limits.

#include "cswarm/flocking.hpp"

namespace cswarm {

struct VehicleLimits {
  double v_max = 5.0;        ///< m/s
  double a_max = 4.0;        ///< m/s^2
  double yaw_rate_max = 2.0; ///< rad/s

  void validate() const;
};

struct TrackerGains {
  double kp = 1.5;
  double kv = 2.5;
  int lookahead = 1; ///< trajectory samples ahead of the current time
};

struct VehicleState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double heading = 0.0;
  Vec3 acceleration = Vec3::Zero(); ///< realized over the last step
};

struct Reference {
  Vec3 position;
  Vec3 velocity;
  double heading;
};

/// Linear interpolation of the trajectory at time offset `tau`; velocity is the
/// slope of the containing segment. Clamped to the ends.
Reference sample_trajectory(const Trajectory& traj, double tau);

/// One dt of double-integrator motion. Position error is taken against the
/// reference at `elapsed` (time since the trajectory was generated); velocity
/// feedforward and heading come from `lookahead` samples further on.
VehicleState tracker_step(const VehicleState& state, const Trajectory& traj, double elapsed,
                          const VehicleLimits& limits, const TrackerGains& gains, double dt);

} // namespace cswarm
