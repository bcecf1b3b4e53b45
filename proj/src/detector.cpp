#include "cswarm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cswarm {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok)
    throw std::invalid_argument(std::string("detector.") + field + ": " + what);
}

} // namespace

void DetectorConfig::validate() const {
  require(sensitive_area > 0.0, "sensitive_area", "must be > 0");
  require(intrinsic_efficiency > 0.0 && intrinsic_efficiency <= 1.0, "intrinsic_efficiency",
          "must be in (0, 1]");
  require(fov_half_angle > 0.0 && fov_half_angle <= kPi, "fov_half_angle", "must be in (0, pi]");
  require(angular_noise_sigma >= 0.0, "angular_noise_sigma", "must be >= 0");
  require(min_theta > 0.0, "min_theta", "must be > 0");
  require(max_theta > min_theta && max_theta < kPi, "max_theta", "must be in (min_theta, pi)");
  require(rate_cap > 0.0, "rate_cap", "must be > 0");
  require(mount_axis.norm() > 0.0, "mount_axis", "must be non-zero");
}

DetectorConfig DetectorConfig::forward_hemisphere() {
  DetectorConfig cfg;
  cfg.fov_half_angle = kPi / 2.0;
  return cfg;
}

double expected_event_rate(const SourceState& source, const Pose& detector_pose,
                           const DetectorConfig& cfg) {
  const Vec3 to_source = source.position - detector_pose.position;
  const double d2 = to_source.squaredNorm();
  if (d2 == 0.0)
    return cfg.rate_cap;
  const Vec3 mount = detector_pose.rotate(cfg.mount_axis).normalized();
  const double psi = angle_between(mount, to_source);
  if (psi > cfg.fov_half_angle)
    return 0.0;
  const double projected_area = cfg.sensitive_area * std::max(0.0, std::cos(psi));
  const double rate =
      source.activity * cfg.intrinsic_efficiency * projected_area / (4.0 * kPi * d2);
  return std::min(rate, cfg.rate_cap);
}

std::vector<double> sample_step_detections(double rate, double t0, double dt, Rng& rng) {
  std::vector<double> times;
  const double mean = rate * dt;
  if (!(mean > 0.0))
    return times;
  std::poisson_distribution<int> count_dist(mean);
  const int n = count_dist(rng);
  std::uniform_real_distribution<double> offset(0.0, dt);
  times.reserve(n);
  for (int i = 0; i < n; ++i)
    times.push_back(t0 + offset(rng));
  std::sort(times.begin(), times.end());
  return times;
}

std::vector<double> sample_detections(const std::function<double(double)>& rate, double dt,
                                      double horizon, Rng& rng) {
  if (!(dt > 0.0))
    throw std::invalid_argument("sample_detections: dt must be > 0");
  std::vector<double> times;
  const auto steps = static_cast<long>(std::ceil(horizon / dt));
  for (long k = 0; k < steps; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double len = std::min(dt, horizon - t0);
    for (double t : sample_step_detections(rate(t0), t0, len, rng))
      times.push_back(t);
  }
  return times;
}

std::vector<double> sample_detections(const std::function<SourceState(double)>& source_traj,
                                      const std::function<Pose(double)>& detector_traj,
                                      const DetectorConfig& cfg, double dt, double horizon,
                                      Rng& rng) {
  return sample_detections(
      [&](double t) { return expected_event_rate(source_traj(t), detector_traj(t), cfg); }, dt,
      horizon, rng);
}

ComptonCone synthesize_cone(const Vec3& true_source, const Pose& detector_pose,
                            const DetectorConfig& cfg, Rng& rng) {
  const Vec3 dir = (true_source - detector_pose.position).normalized();
  const Vec3 e1 = any_perpendicular(dir);
  const Vec3 e2 = dir.cross(e1);

  std::uniform_real_distribution<double> theta_dist(cfg.min_theta, cfg.max_theta);
  std::uniform_real_distribution<double> azimuth_dist(0.0, kTwoPi);
  const double theta = theta_dist(rng);
  const double azimuth = azimuth_dist(rng);
  const Vec3 axis = std::cos(theta) * dir +
                    std::sin(theta) * (std::cos(azimuth) * e1 + std::sin(azimuth) * e2);

  double half_angle = theta;
  if (cfg.angular_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.angular_noise_sigma);
    half_angle += noise(rng);
  }
  constexpr double kEdge = 1e-6;
  half_angle = std::clamp(half_angle, kEdge, kPi - kEdge);
  return ComptonCone{detector_pose.position, UnitVec3::normalize(axis), half_angle};
}

} // namespace cswarm
