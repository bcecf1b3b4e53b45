#include "cswarm/flocking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cswarm {

void FlockConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok)
      throw std::invalid_argument(std::string("flock.") + field + ": " + what);
  };
  require(r > 0.0, "r", "must be > 0");
  require(v > 0.0, "v", "must be > 0");
  require(K >= 1, "K", "must be >= 1");
  require(dt > 0.0, "dt", "must be > 0");
  require(beta_max >= 0.0, "beta_max", "must be >= 0");
  require(n_agents >= 1, "n_agents", "must be >= 1");
  require(deadband >= 0.0 && deadband < uniform_spacing(), "deadband",
          "must be in [0, 2 pi / n_agents)");
  require(planning_rate > 0.0, "planning_rate", "must be > 0");
}

PolarPos to_polar(const Vec3& p, const Vec3& center) {
  const double dx = p.x() - center.x();
  const double dy = p.y() - center.y();
  const double radius = std::hypot(dx, dy);
  return {radius, radius > 0.0 ? std::atan2(dy, dx) : 0.0};
}

double nearest_neighbor_angle(const PolarPos& self, std::span<const PolarPos> others) {
  if (others.empty())
    throw std::invalid_argument("nearest_neighbor_angle: no neighbors");
  double best = angle_diff(self.phi, others[0].phi);
  for (size_t j = 1; j < others.size(); ++j) {
    const double d = angle_diff(self.phi, others[j].phi);
    if (std::abs(d) < std::abs(best))
      best = d;
  }
  return best;
}

double bias_angle(double theta_i, const FlockConfig& cfg) {
  const double target = cfg.uniform_spacing();
  const double magnitude = std::abs(theta_i);
  if (std::abs(target - magnitude) <= cfg.deadband)
    return 0.0;
  const double deficit = std::clamp((target - magnitude) / target, 0.0, 1.0);
  const double sign = theta_i > 0.0 ? 1.0 : (theta_i < 0.0 ? -1.0 : 0.0);
  return -sign * cfg.beta_max * deficit;
}

Trajectory generate_encirclement_trajectory(const Vec3& self_world, const Vec3& hypothesis,
                                            double beta_i, const FlockConfig& cfg) {
  const double phi0 = to_polar(self_world, hypothesis).phi + beta_i;
  const double step = cfg.v / cfg.r * cfg.dt;
  Trajectory traj;
  traj.reserve(cfg.K + 1);
  for (int k = 0; k <= cfg.K; ++k) {
    const double phi = phi0 + k * step;
    TrajectoryPoint pt;
    pt.position = Vec3(hypothesis.x() + cfg.r * std::cos(phi),
                       hypothesis.y() + cfg.r * std::sin(phi), cfg.height);
    pt.heading = wrap_angle(phi + kPi);
    pt.time_offset = k * cfg.dt;
    traj.push_back(pt);
  }
  return traj;
}

std::vector<WaypointPath> generate_search_paths(const Rect& area, int n_agents,
                                                double lane_spacing, double height) {
  if (!(lane_spacing > 0.0))
    throw std::invalid_argument("generate_search_paths: lane_spacing must be > 0");
  if (!(area.width() > 0.0) || !(area.height() > 0.0))
    throw std::invalid_argument("generate_search_paths: degenerate area");
  if (n_agents < 1)
    throw std::invalid_argument("generate_search_paths: n_agents must be >= 1");

  const double strip = area.width() / n_agents;
  const int lanes = std::max(1, static_cast<int>(std::ceil(strip / lane_spacing - 1e-9)));
  const double pitch = strip / lanes;

  std::vector<WaypointPath> paths;
  paths.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    const double x0 = area.x_min + i * strip;
    WaypointPath path;
    for (int l = 0; l < lanes; ++l) {
      const double x = x0 + (l + 0.5) * pitch;
      const bool up = l % 2 == 0;
      path.emplace_back(x, up ? area.y_min : area.y_max, height);
      path.emplace_back(x, up ? area.y_max : area.y_min, height);
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

double search_heading(double t, double yaw_rate) { return wrap_angle(t * yaw_rate); }

double path_length(const WaypointPath& path) {
  double len = 0.0;
  for (size_t i = 1; i < path.size(); ++i)
    len += (path[i] - path[i - 1]).norm();
  return len;
}

Vec3 point_along_path(const WaypointPath& path, double s) {
  if (path.empty())
    return Vec3::Zero();
  if (s <= 0.0)
    return path.front();
  for (size_t i = 1; i < path.size(); ++i) {
    const Vec3 seg = path[i] - path[i - 1];
    const double len = seg.norm();
    if (s <= len)
      return path[i - 1] + (len > 0.0 ? s / len : 0.0) * seg;
    s -= len;
  }
  return path.back();
}

} // namespace cswarm
