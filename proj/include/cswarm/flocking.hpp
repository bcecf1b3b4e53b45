#pragma once

// Decentralized motion planning: lawnmower search paths for the
// initialization stage and the bias-angle encirclement trajectory for
// tracking.

#include "cswarm/geometry.hpp"

#include <span>
#include <vector>

namespace cswarm {

struct FlockConfig {
  double r = 12.0;          ///< m, circle radius
  double v = 3.0;           ///< m/s, tangential speed
  int K = 30;               ///< trajectory steps (K + 1 samples)
  double dt = 0.2;          ///< s, trajectory sampling period
  double beta_max = 0.3;    ///< rad
  double deadband = 0.02;   ///< rad
  int n_agents = 1;
  double height = 4.0;      ///< m, shared flight height
  double planning_rate = 2.0; ///< Hz

  /// 2 pi / N.
  double uniform_spacing() const { return kTwoPi / n_agents; }
  void validate() const;
};

/// Position in the encirclement plane, polar about the hypothesis.
struct PolarPos {
  double radius = 0.0;
  double phi = 0.0;
};

struct TrajectoryPoint {
  Vec3 position;
  double heading = 0.0;
  double time_offset = 0.0;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// Polar coordinates of `p` about `center` in the horizontal plane.
PolarPos to_polar(const Vec3& p, const Vec3& center);

/// Signed central angle to the nearest neighbor (ties: lowest index).
double nearest_neighbor_angle(const PolarPos& self, std::span<const PolarPos> others);

/// Repulsive azimuth offset, opposite in sign to `theta_i` and scaled by the
/// spacing deficit; zero inside the deadband around uniform spacing.
double bias_angle(double theta_i, const FlockConfig& cfg);

/// K + 1 samples of a counterclockwise arc of radius r about the hypothesis,
/// starting at the agent's azimuth plus the bias.
Trajectory generate_encirclement_trajectory(const Vec3& self_world, const Vec3& hypothesis,
                                            double beta_i, const FlockConfig& cfg);

struct Rect {
  double x_min = 0.0;
  double x_max = 100.0;
  double y_min = 0.0;
  double y_max = 100.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

using WaypointPath = std::vector<Vec3>;

/// Splits `area` into N equal-width strips along x and gives each a
/// boustrophedon path with lanes parallel to y.
std::vector<WaypointPath> generate_search_paths(const Rect& area, int n_agents,
                                                double lane_spacing, double height);

/// Continuously rotating heading, wrapped to (-pi, pi].
double search_heading(double t, double yaw_rate);

/// Point at arc length `s` along a polyline (clamped to its ends).
Vec3 point_along_path(const WaypointPath& path, double s);

/// Total polyline length.
double path_length(const WaypointPath& path);

} // namespace cswarm
