#pragma once

// One swarm member: the two-stage mission logic (search until M cones, then
// fuse and encircle), running entirely in the agent's own coordinate frame.

#include "cswarm/bus.hpp"
#include "cswarm/flocking.hpp"
#include "cswarm/frames.hpp"
#include "cswarm/fusion.hpp"
#include "cswarm/tracker.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cswarm {

enum class AgentStage { SearchingInit, Tracking };

const char* to_string(AgentStage stage);

struct AgentParams {
  int id = 0;
  FlockConfig flock;
  FusionConfig fusion;
  NllsConfig nlls;
  Bounds3 nlls_bounds;          ///< mission frame
  WaypointPath search_path;     ///< mission frame
  double search_speed = 3.0;
  double search_yaw_rate = 0.5;
  FrameTransform mission_to_local; ///< A1/A2: how this agent's frame relates to the mission frame
};

struct TimedTrajectory {
  double t0 = 0.0;
  Trajectory points; ///< local frame
};

/// Things that happened during one agent step, for the run log.
struct AgentReport {
  struct Update {
    Vec3 x_local;
    double p_trace;
    bool applied;
    double cone_time;
    int cone_agent;
  };
  std::vector<Update> updates;
  std::optional<AgentStage> stage_change;
  struct NllsOutcome {
    bool ok;
    Vec3 x_local;
    double cost;
    int start_index;
    int iterations;
    int n_cones;
    std::string error;
  };
  std::optional<NllsOutcome> nlls;
};

class Agent {
public:
  explicit Agent(AgentParams params);

  int id() const { return params_.id; }
  AgentStage stage() const { return stage_; }
  const std::optional<Hypothesis>& hypothesis() const { return hypothesis_; }
  const TimedTrajectory& trajectory() const { return trajectory_; }
  const AgentParams& params() const { return params_; }
  size_t cones_seen() const { return cones_seen_; }
  int nlls_invocations() const { return nlls_invocations_; }

  /// Cone already expressed in this agent's frame.
  void receive_cone(const MeasurementEvent& local_event);
  /// Neighbor position already expressed in this agent's frame.
  void receive_position(int sender, const Vec3& local_position);

  /// Runs the stage machine and, when due, replans. `own` is the vehicle state
  /// in this agent's frame.
  AgentReport step(const VehicleState& own, double now, double dt);

  /// Skips initialization and holds the given hypothesis fixed (no fusion).
  void hold_hypothesis(const Vec3& x_local);
  /// Back to the search stage after a target loss.
  void restart_search(double now);

private:
  void plan(const VehicleState& own, double now);
  Trajectory search_trajectory(double now) const;

  AgentParams params_;
  AgentStage stage_ = AgentStage::SearchingInit;
  std::optional<Hypothesis> hypothesis_;
  bool hypothesis_fixed_ = false;

  std::vector<MeasurementEvent> pending_;
  std::vector<ComptonCone> init_cones_; ///< mission frame
  size_t cones_seen_ = 0;
  size_t nlls_attempted_at_ = 0;
  int nlls_invocations_ = 0;

  std::map<int, Vec3> neighbors_;
  TimedTrajectory trajectory_;
  double next_plan_time_ = 0.0;
  double search_progress_ = 0.0;
  bool force_replan_ = true;
};

} // namespace cswarm
