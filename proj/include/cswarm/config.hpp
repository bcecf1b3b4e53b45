#pragma once

// Scenario configuration: the JSON document accepted by the CLI and the C API.
// The accepted layout is documented in docs/config.schema.json; parsing is
// strict (unknown keys are rejected) and errors name the offending field.

#include "cswarm/detector.hpp"
#include "cswarm/flocking.hpp"
#include "cswarm/fusion.hpp"
#include "cswarm/tracker.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cswarm {

using ojson = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

enum class SourceMotion { Static, Circular, Waypoints };

const char* to_string(SourceMotion m);

/// Scripted source trajectory.
struct SourceScript {
  SourceMotion type = SourceMotion::Static;
  Vec3 position = Vec3(50.0, 50.0, 0.0); ///< static
  Vec3 center = Vec3(50.0, 50.0, 0.0);   ///< circular
  double radius = 40.0;
  double speed = 1.0;                    ///< circular and waypoints
  double phase = 0.0;                    ///< circular, rad at t = 0
  std::vector<Vec3> waypoints;           ///< piecewise linear
  bool loop = false;                     ///< waypoints: restart at the end

  /// Position and velocity at time t.
  SourceState at(double t, double activity) const;
};

struct SourceSpec {
  double activity = 3e9;
  SourceScript motion;
  bool randomize_start = false;
};

struct SearchSpec {
  double lane_spacing = 20.0;
  double speed = 3.0;
  double yaw_rate = 0.5;
};

struct NllsSpec {
  NllsConfig solver;
  double z_min = 0.0;
  double z_max = 0.0;
};

struct VehicleSpec {
  VehicleLimits limits;
  TrackerGains gains;
};

struct TerminationSpec {
  double loss_timeout = 20.0;
  double tracking_limit = 180.0;
  double max_sim_time = 1500.0;
  bool re_search = false;
};

struct SimSpec {
  double dt = 0.05;
  double bus_latency = 0.1;
  double log_interval = 0.05;
  bool log_states = true;
  bool heterogeneous_frames = false;
};

enum class ScenarioKind { Localization, Stabilization };

/// Flocking-only experiment: static hypothesis shifted periodically.
struct StabilizationSpec {
  Vec3 hypothesis = Vec3(50.0, 50.0, 0.0);
  double step_size = 10.0;
  double step_period = 60.0;
  double duration = 300.0;
  double spawn_radius = 30.0;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Localization;
  Rect area;
  int n_agents = 3;
  FlockConfig flock;
  SearchSpec search;
  FusionConfig fusion;
  NllsSpec nlls;
  DetectorConfig detector;
  VehicleSpec vehicle;
  SourceSpec source;
  TerminationSpec termination;
  SimSpec sim;
  StabilizationSpec stabilization;
  std::uint64_t seed = 0;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Parses and validates. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig parse_config_string(const std::string& text);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Full canonical form (every field), parseable by parse_config.
ojson to_json(const ScenarioConfig& cfg);

} // namespace cswarm
