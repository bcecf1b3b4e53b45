#include "cswarm/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cswarm {

void VehicleLimits::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok)
      throw std::invalid_argument(std::string("vehicle.") + field + ": must be > 0");
  };
  require(v_max > 0.0, "v_max");
  require(a_max > 0.0, "a_max");
  require(yaw_rate_max > 0.0, "yaw_rate_max");
}

Reference sample_trajectory(const Trajectory& traj, double tau) {
  if (traj.empty())
    throw std::invalid_argument("sample_trajectory: empty trajectory");
  if (traj.size() == 1 || tau <= traj.front().time_offset) {
    Vec3 vel = Vec3::Zero();
    if (traj.size() > 1)
      vel = (traj[1].position - traj[0].position) / (traj[1].time_offset - traj[0].time_offset);
    return {traj.front().position, vel, traj.front().heading};
  }
  for (size_t i = 1; i < traj.size(); ++i) {
    const auto& a = traj[i - 1];
    const auto& b = traj[i];
    const double span = b.time_offset - a.time_offset;
    if (tau <= b.time_offset) {
      const double s = (tau - a.time_offset) / span;
      return {a.position + s * (b.position - a.position), (b.position - a.position) / span,
              a.heading + s * angle_diff(a.heading, b.heading)};
    }
  }
  const auto& a = traj[traj.size() - 2];
  const auto& b = traj.back();
  return {b.position, (b.position - a.position) / (b.time_offset - a.time_offset), b.heading};
}

VehicleState tracker_step(const VehicleState& state, const Trajectory& traj, double elapsed,
                          const VehicleLimits& limits, const TrackerGains& gains, double dt) {
  if (!(dt > 0.0))
    throw std::invalid_argument("tracker_step: dt must be > 0");
  const double period =
      traj.size() > 1 ? traj[1].time_offset - traj[0].time_offset : 0.0;
  // Position error against the reference now; velocity feedforward and heading
  // from `lookahead` points ahead.
  const Reference now = sample_trajectory(traj, elapsed);
  const Reference ref = sample_trajectory(traj, elapsed + gains.lookahead * period);

  Vec3 accel = gains.kp * (now.position - state.position) + gains.kv * (ref.velocity - state.velocity);
  const double a_norm = accel.norm();
  if (a_norm > limits.a_max)
    accel *= limits.a_max / a_norm;

  VehicleState next = state;
  next.velocity = state.velocity + accel * dt;
  const double speed = next.velocity.norm();
  if (speed > limits.v_max)
    next.velocity *= limits.v_max / speed;
  next.acceleration = (next.velocity - state.velocity) / dt;
  next.position = state.position + next.velocity * dt;

  const double max_turn = limits.yaw_rate_max * dt;
  const double turn = std::clamp(angle_diff(state.heading, ref.heading), -max_turn, max_turn);
  next.heading = wrap_angle(state.heading + turn);
  return next;
}

} // namespace cswarm
