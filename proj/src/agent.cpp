#include "cswarm/agent.hpp"

#include <algorithm>
#include <cmath>

namespace cswarm {

const char* to_string(AgentStage stage) {
  switch (stage) {
  case AgentStage::SearchingInit:
    return "searching_init";
  case AgentStage::Tracking:
    return "tracking";
  }
  return "unknown";
}

Agent::Agent(AgentParams params) : params_(std::move(params)) {}

void Agent::receive_cone(const MeasurementEvent& local_event) { pending_.push_back(local_event); }

void Agent::receive_position(int sender, const Vec3& local_position) {
  if (sender != params_.id)
    neighbors_[sender] = local_position;
}

void Agent::hold_hypothesis(const Vec3& x_local) {
  const double p0 = params_.fusion.p0;
  hypothesis_ = Hypothesis{x_local, p0 * Mat3::Identity()};
  hypothesis_fixed_ = true;
  stage_ = AgentStage::Tracking;
  force_replan_ = true;
}

void Agent::restart_search(double) {
  stage_ = AgentStage::SearchingInit;
  hypothesis_.reset();
  init_cones_.clear();
  pending_.clear();
  cones_seen_ = 0;
  nlls_attempted_at_ = 0;
  search_progress_ = 0.0;
  force_replan_ = true;
}

AgentReport Agent::step(const VehicleState& own, double now, double dt) {
  AgentReport report;
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const MeasurementEvent& a, const MeasurementEvent& b) {
                     if (a.time != b.time)
                       return a.time < b.time;
                     return a.agent_id < b.agent_id;
                   });

  if (stage_ == AgentStage::SearchingInit) {
    const FrameTransform to_mission = params_.mission_to_local.inverse();
    for (const auto& e : pending_)
      init_cones_.push_back(transform_cone(e.cone, to_mission));
    cones_seen_ += pending_.size();
    pending_.clear();

    if (cones_seen_ >= static_cast<size_t>(params_.fusion.M) && cones_seen_ > nlls_attempted_at_) {
      nlls_attempted_at_ = cones_seen_;
      ++nlls_invocations_;
      AgentReport::NllsOutcome outcome{};
      outcome.n_cones = static_cast<int>(init_cones_.size());
      try {
        const NllsResult res = init_hypothesis_nlls(init_cones_, params_.nlls_bounds, params_.nlls);
        outcome.ok = true;
        outcome.x_local = params_.mission_to_local.apply(res.x);
        outcome.cost = res.cost;
        outcome.start_index = res.start_index;
        outcome.iterations = res.iterations;
        hypothesis_ = Hypothesis{outcome.x_local, params_.fusion.p0 * Mat3::Identity()};
        stage_ = AgentStage::Tracking;
        report.stage_change = stage_;
        force_replan_ = true;
      } catch (const InitializationFailed& e) {
        outcome.ok = false;
        outcome.error = e.what();
      }
      report.nlls = outcome;
    }
  } else {
    if (!hypothesis_fixed_) {
      for (const auto& e : pending_) {
        const Correction c = fuse_cone(*hypothesis_, e.cone, params_.fusion);
        hypothesis_ = c.h;
        report.updates.push_back({c.h.x, c.h.P.trace(), c.applied, e.time, e.agent_id});
      }
      cones_seen_ += pending_.size();
    }
    pending_.clear();
  }

  if (force_replan_ || now >= next_plan_time_ - 1e-9) {
    plan(own, now);
    next_plan_time_ = now + 1.0 / params_.flock.planning_rate;
    force_replan_ = false;
  }
  if (stage_ == AgentStage::SearchingInit)
    search_progress_ = std::min(search_progress_ + params_.search_speed * dt,
                                path_length(params_.search_path));
  return report;
}

Trajectory Agent::search_trajectory(double now) const {
  const FlockConfig& f = params_.flock;
  Trajectory traj;
  traj.reserve(f.K + 1);
  for (int k = 0; k <= f.K; ++k) {
    const double tau = k * f.dt;
    const Vec3 mission =
        point_along_path(params_.search_path, search_progress_ + params_.search_speed * tau);
    const double heading = search_heading(now + tau, params_.search_yaw_rate);
    traj.push_back({params_.mission_to_local.apply(mission),
                    wrap_angle(params_.mission_to_local.apply_heading(heading)), tau});
  }
  return traj;
}

void Agent::plan(const VehicleState& own, double now) {
  trajectory_.t0 = now;
  if (stage_ == AgentStage::SearchingInit || !hypothesis_) {
    trajectory_.points = search_trajectory(now);
    return;
  }
  const Vec3& center = hypothesis_->x;
  double beta = 0.0;
  if (!neighbors_.empty()) {
    std::vector<PolarPos> others;
    others.reserve(neighbors_.size());
    for (const auto& [id, pos] : neighbors_)
      others.push_back(to_polar(pos, center));
    beta = bias_angle(nearest_neighbor_angle(to_polar(own.position, center), others),
                      params_.flock);
  }
  trajectory_.points = generate_encirclement_trajectory(own.position, center, beta, params_.flock);
}

} // namespace cswarm
