#include "cswarm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace cswarm {

using ojson = nlohmann::ordered_json;

const char* to_string(Termination t) {
  switch (t) {
  case Termination::TargetLost:
    return "target_lost";
  case Termination::TrackingComplete:
    return "tracking_complete";
  case Termination::SimTimeLimit:
    return "sim_time_limit";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// stream ids
constexpr std::uint64_t kSourceStream = 1;
constexpr std::uint64_t kFrameStream = 2;
constexpr std::uint64_t kStabilizationStream = 3;
constexpr std::uint64_t kDetectorStreamBase = 100;

ojson vec_json(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const ojson& j) { return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()); }

ojson cone_json(const ComptonCone& c) {
  return ojson{{"apex", vec_json(c.apex)}, {"axis", vec_json(c.axis.vec())},
               {"half_angle", c.half_angle}};
}

VehicleState to_local(const VehicleState& s, const FrameTransform& T) {
  VehicleState out = s;
  out.position = T.apply(s.position);
  out.velocity = T.rotate(s.velocity);
  out.acceleration = T.rotate(s.acceleration);
  out.heading = T.apply_heading(s.heading);
  return out;
}

Trajectory to_frame(const Trajectory& traj, const FrameTransform& T) {
  Trajectory out = traj;
  for (auto& p : out) {
    p.position = T.apply(p.position);
    p.heading = T.apply_heading(p.heading);
  }
  return out;
}

std::vector<AgentParams> make_agent_params(const ScenarioConfig& cfg,
                                           const std::vector<FrameTransform>& frames) {
  const auto paths = generate_search_paths(cfg.area, cfg.n_agents, cfg.search.lane_spacing,
                                           cfg.flock.height);
  const Bounds3 bounds{Vec3(cfg.area.x_min, cfg.area.y_min, cfg.nlls.z_min),
                       Vec3(cfg.area.x_max, cfg.area.y_max, cfg.nlls.z_max)};
  std::vector<AgentParams> params;
  for (int i = 0; i < cfg.n_agents; ++i) {
    AgentParams p;
    p.id = i;
    p.flock = cfg.flock;
    p.flock.n_agents = cfg.n_agents;
    p.fusion = cfg.fusion;
    p.nlls = cfg.nlls.solver;
    p.nlls_bounds = bounds;
    p.search_path = paths[i];
    p.search_speed = cfg.search.speed;
    p.search_yaw_rate = cfg.search.yaw_rate;
    p.mission_to_local = frames[i];
    params.push_back(std::move(p));
  }
  return params;
}

ojson header_payload(const ScenarioConfig& cfg, std::uint64_t seed,
                     const std::vector<FrameTransform>& frames) {
  ojson fr = ojson::array();
  for (const auto& f : frames) {
    const Vec3 x = f.rotate(Vec3::UnitX());
    fr.push_back({{"frame_id", f.to_frame},
                  {"yaw", std::atan2(x.y(), x.x())},
                  {"translation", vec_json(f.translation)}});
  }
  ScenarioConfig echo = cfg;
  echo.seed = seed;
  return ojson{{"schema", kRunLogSchema},  {"version", kRunLogSchemaVersion},
               {"seed", seed},             {"n_agents", cfg.n_agents},
               {"config", to_json(echo)},  {"frames", fr}};
}

// |theta* - |theta_i|| of every agent about its own hypothesis, from true
// positions. Empty optional for agents without a hypothesis or when alone.
std::vector<std::optional<double>> spacing_errors(const std::vector<VehicleState>& vehicles,
                                                  const std::vector<std::optional<Vec3>>& hyps,
                                                  const FlockConfig& flock) {
  const size_t n = vehicles.size();
  std::vector<std::optional<double>> out(n);
  if (n < 2)
    return out;
  for (size_t i = 0; i < n; ++i) {
    if (!hyps[i])
      continue;
    std::vector<PolarPos> others;
    for (size_t j = 0; j < n; ++j)
      if (j != i)
        others.push_back(to_polar(vehicles[j].position, *hyps[i]));
    const double theta = nearest_neighbor_angle(to_polar(vehicles[i].position, *hyps[i]), others);
    out[i] = std::abs(flock.uniform_spacing() - std::abs(theta));
  }
  return out;
}

void log_states(RunLog& log, double t, const std::vector<VehicleState>& vehicles,
                const std::vector<Agent>& agents, const std::vector<FrameTransform>& frames,
                const FlockConfig& flock, const Vec3& truth) {
  std::vector<std::optional<Vec3>> hyps(agents.size());
  for (size_t i = 0; i < agents.size(); ++i)
    if (agents[i].hypothesis())
      hyps[i] = frames[i].inverse().apply(agents[i].hypothesis()->x);
  const auto spacing = spacing_errors(vehicles, hyps, flock);

  log.append(t, "truth", -1, ojson{{"position", vec_json(truth)}});
  for (size_t i = 0; i < agents.size(); ++i) {
    const VehicleState& v = vehicles[i];
    ojson p;
    p["position"] = vec_json(v.position);
    p["velocity"] = vec_json(v.velocity);
    p["speed"] = v.velocity.norm();
    p["heading"] = v.heading;
    p["acceleration"] = vec_json(v.acceleration);
    p["stage"] = to_string(agents[i].stage());
    p["hypothesis"] = hyps[i] ? vec_json(*hyps[i]) : ojson(nullptr);
    p["spacing_error"] = spacing[i] ? ojson(*spacing[i]) : ojson(nullptr);
    log.append(t, "state", static_cast<int>(i), std::move(p));
  }
}

void deliver(MessageBus& bus, std::vector<Agent>& agents, double now,
             const std::vector<std::vector<FrameTransform>>& between) {
  for (size_t i = 0; i < agents.size(); ++i) {
    for (const Message& m : bus.collect(static_cast<int>(i), now)) {
      const FrameTransform& T = between[m.sender][i];
      if (const auto* ev = std::get_if<MeasurementEvent>(&m.body))
        agents[i].receive_cone(transform_measurement(*ev, T));
      else if (const auto* pos = std::get_if<PositionReport>(&m.body))
        agents[i].receive_position(m.sender, T.apply(pos->position));
    }
  }
}

std::vector<std::vector<FrameTransform>> frame_links(const std::vector<FrameTransform>& frames) {
  const size_t n = frames.size();
  std::vector<std::vector<FrameTransform>> between(n, std::vector<FrameTransform>(n));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < n; ++i)
      between[j][i] = frames[j].inverse().then(frames[i]);
  return between;
}

void publish_positions(MessageBus& bus, const std::vector<VehicleState>& vehicles,
                       const std::vector<FrameTransform>& frames, double t) {
  for (size_t i = 0; i < vehicles.size(); ++i) {
    const VehicleState local = to_local(vehicles[i], frames[i]);
    bus.publish(Message{t, static_cast<int>(i), frames[i].to_frame,
                        PositionReport{local.position, local.heading}});
  }
}

void move_vehicles(std::vector<VehicleState>& vehicles, const std::vector<Agent>& agents,
                   const std::vector<FrameTransform>& frames, const VehicleSpec& spec, double t,
                   double dt) {
  for (size_t i = 0; i < vehicles.size(); ++i) {
    const TimedTrajectory& traj = agents[i].trajectory();
    if (traj.points.empty())
      continue;
    const Trajectory world = to_frame(traj.points, frames[i].inverse());
    vehicles[i] = tracker_step(vehicles[i], world, t - traj.t0, spec.limits, spec.gains, dt);
  }
}

RunLog run_localization(const ScenarioConfig& cfg, std::uint64_t seed) {
  const int n = cfg.n_agents;
  const double dt = cfg.sim.dt;
  const auto frames = make_frames(cfg, seed);
  const auto between = frame_links(frames);

  std::vector<Agent> agents;
  std::vector<VehicleState> vehicles(n);
  std::vector<Rng> rngs;
  for (auto& p : make_agent_params(cfg, frames)) {
    vehicles[p.id].position = p.search_path.front();
    rngs.push_back(make_rng(seed, kDetectorStreamBase + static_cast<std::uint64_t>(p.id)));
    agents.emplace_back(std::move(p));
  }
  MessageBus bus(n, cfg.sim.bus_latency);

  RunLog log;
  log.append(0.0, "header", -1, header_payload(cfg, seed, frames));

  const long log_every = std::max(1L, std::lround(cfg.sim.log_interval / dt));
  double last_cone = -std::numeric_limits<double>::infinity();
  // NaN while no agent is tracking
  double tracking_start = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> first_x0;

  struct Detection {
    double time;
    int agent;
    ComptonCone cone;
  };

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const SourceState src = cfg.source.motion.at(t, cfg.source.activity);

    deliver(bus, agents, t, between);
    for (int i = 0; i < n; ++i) {
      const FrameTransform to_world = frames[i].inverse();
      const AgentStage before = agents[i].stage();
      const AgentReport report = agents[i].step(to_local(vehicles[i], frames[i]), t, dt);
      if (report.nlls) {
        const auto& o = *report.nlls;
        ojson p{{"ok", o.ok}, {"n_cones", o.n_cones}};
        if (o.ok) {
          p["x0"] = vec_json(to_world.apply(o.x_local));
          p["cost"] = o.cost;
          p["start_index"] = o.start_index;
          p["iterations"] = o.iterations;
          p["truth"] = vec_json(src.position);
        } else {
          p["error"] = o.error;
        }
        log.append(t, "nlls", i, std::move(p));
      }
      if (report.stage_change) {
        log.append(t, "stage", i,
                   ojson{{"from", to_string(before)}, {"to", to_string(*report.stage_change)},
                         {"cones", agents[i].cones_seen()}});
        if (*report.stage_change == AgentStage::Tracking) {
          if (std::isnan(tracking_start))
            tracking_start = t;
          if (!first_x0)
            first_x0 = t;
        }
      }
      for (const auto& u : report.updates) {
        if (!u.applied)
          log.append(t, "correction_skipped", i, ojson{{"cone_time", u.cone_time}});
        log.append(t, "hypothesis", i,
                   ojson{{"x", vec_json(to_world.apply(u.x_local))},
                         {"truth", vec_json(src.position)},
                         {"p_trace", u.p_trace},
                         {"cone_time", u.cone_time},
                         {"cone_agent", u.cone_agent}});
      }
    }

    std::optional<Termination> reason;
    if (!std::isnan(tracking_start)) {
      if (t - std::max(last_cone, tracking_start) > cfg.termination.loss_timeout)
        reason = Termination::TargetLost;
      else if (t - tracking_start >= cfg.termination.tracking_limit)
        reason = Termination::TrackingComplete;
    }
    if (!reason && t >= cfg.termination.max_sim_time)
      reason = Termination::SimTimeLimit;

    if (reason == Termination::TargetLost && cfg.termination.re_search) {
      log.append(t, "target_lost", -1, ojson{{"tracking_start", tracking_start}});
      for (auto& a : agents) {
        const AgentStage before = a.stage();
        a.restart_search(t);
        log.append(t, "stage", a.id(),
                   ojson{{"from", to_string(before)}, {"to", to_string(a.stage())},
                         {"cones", a.cones_seen()}});
      }
      tracking_start = std::numeric_limits<double>::quiet_NaN();
      reason.reset();
      if (t >= cfg.termination.max_sim_time)
        reason = Termination::SimTimeLimit;
    }
    if (reason) {
      ojson p{{"reason", to_string(*reason)}, {"sim_time", t}};
      p["time_to_x0"] = first_x0 ? ojson(*first_x0) : ojson(nullptr);
      p["tracking_start"] = std::isnan(tracking_start) ? ojson(nullptr) : ojson(tracking_start);
      log.append(t, "termination", -1, std::move(p));
      break;
    }

    if (cfg.sim.log_states && k % log_every == 0)
      log_states(log, t, vehicles, agents, frames, cfg.flock, src.position);

    std::vector<Detection> detections;
    for (int i = 0; i < n; ++i) {
      const Pose pose = Pose::from_yaw(vehicles[i].position, vehicles[i].heading);
      const double rate = expected_event_rate(src, pose, cfg.detector);
      for (double te : sample_step_detections(rate, t, dt, rngs[i])) {
        const Vec3 truth = cfg.source.motion.at(te, cfg.source.activity).position;
        detections.push_back({te, i, synthesize_cone(truth, pose, cfg.detector, rngs[i])});
      }
    }
    std::stable_sort(detections.begin(), detections.end(),
                     [](const Detection& a, const Detection& b) {
                       if (a.time != b.time)
                         return a.time < b.time;
                       return a.agent < b.agent;
                     });
    for (const auto& d : detections) {
      last_cone = std::max(last_cone, d.time);
      const MeasurementEvent world{d.time, d.cone, d.agent, 0};
      const MeasurementEvent local = transform_measurement(world, frames[d.agent]);
      log.append(d.time, "event", d.agent,
                 ojson{{"frame_id", local.frame_id},
                       {"cone", cone_json(local.cone)},
                       {"world", cone_json(world.cone)}});
      bus.publish(Message{d.time, d.agent, local.frame_id, local});
    }

    publish_positions(bus, vehicles, frames, t);
    move_vehicles(vehicles, agents, frames, cfg.vehicle, t, dt);
  }
  return log;
}

RunLog run_stabilization(const ScenarioConfig& cfg, std::uint64_t seed) {
  const int n = cfg.n_agents;
  const double dt = cfg.sim.dt;
  const auto frames = make_frames(cfg, seed);
  const auto between = frame_links(frames);
  Rng rng = make_rng(seed, kStabilizationStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const StabilizationSpec& spec = cfg.stabilization;
  Vec3 hypothesis = spec.hypothesis;

  std::vector<Agent> agents;
  std::vector<VehicleState> vehicles(n);
  for (auto& p : make_agent_params(cfg, frames)) {
    const double radius = spec.spawn_radius * std::sqrt(unit(rng));
    const double angle = kTwoPi * unit(rng);
    VehicleState& v = vehicles[p.id];
    v.position = Vec3(hypothesis.x() + radius * std::cos(angle),
                      hypothesis.y() + radius * std::sin(angle), cfg.flock.height);
    v.heading = wrap_angle(kTwoPi * unit(rng));
    const FrameTransform T = p.mission_to_local;
    agents.emplace_back(std::move(p));
    agents.back().hold_hypothesis(T.apply(hypothesis));
  }
  MessageBus bus(n, cfg.sim.bus_latency);

  RunLog log;
  log.append(0.0, "header", -1, header_payload(cfg, seed, frames));
  log.append(0.0, "hypothesis_step", -1, ojson{{"hypothesis", vec_json(hypothesis)}});

  const long log_every = std::max(1L, std::lround(cfg.sim.log_interval / dt));
  const long step_every = std::max(1L, std::lround(spec.step_period / dt));
  const long total = std::lround(spec.duration / dt);
  for (long k = 0; k <= total; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (k > 0 && k % step_every == 0) {
      const double dir = kTwoPi * unit(rng);
      hypothesis += spec.step_size * Vec3(std::cos(dir), std::sin(dir), 0.0);
      for (int i = 0; i < n; ++i)
        agents[i].hold_hypothesis(frames[i].apply(hypothesis));
      log.append(t, "hypothesis_step", -1, ojson{{"hypothesis", vec_json(hypothesis)}});
    }
    deliver(bus, agents, t, between);
    for (int i = 0; i < n; ++i)
      agents[i].step(to_local(vehicles[i], frames[i]), t, dt);
    if (k == total) {
      log.append(t, "termination", -1,
                 ojson{{"reason", to_string(Termination::SimTimeLimit)}, {"sim_time", t},
                       {"time_to_x0", nullptr}, {"tracking_start", nullptr}});
      break;
    }
    if (cfg.sim.log_states && k % log_every == 0)
      log_states(log, t, vehicles, agents, frames, cfg.flock, hypothesis);
    publish_positions(bus, vehicles, frames, t);
    move_vehicles(vehicles, agents, frames, cfg.vehicle, t, dt);
  }
  return log;
}

} // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ull)));
}

ScenarioConfig randomize_source(const ScenarioConfig& cfg, std::uint64_t seed) {
  ScenarioConfig out = cfg;
  Rng rng = make_rng(seed, kSourceStream);
  const Rect& a = cfg.area;
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SourceScript& m = out.source.motion;
  switch (m.type) {
  case SourceMotion::Static:
    m.position = Vec3(uniform(a.x_min, a.x_max), uniform(a.y_min, a.y_max), m.position.z());
    break;
  case SourceMotion::Circular: {
    const double cx = a.width() > 2.0 * m.radius ? uniform(a.x_min + m.radius, a.x_max - m.radius)
                                                 : 0.5 * (a.x_min + a.x_max);
    const double cy = a.height() > 2.0 * m.radius
                          ? uniform(a.y_min + m.radius, a.y_max - m.radius)
                          : 0.5 * (a.y_min + a.y_max);
    m.center = Vec3(cx, cy, m.center.z());
    m.phase = uniform(0.0, kTwoPi);
    break;
  }
  case SourceMotion::Waypoints:
    break;
  }
  return out;
}

std::vector<FrameTransform> make_frames(const ScenarioConfig& cfg, std::uint64_t seed) {
  std::vector<FrameTransform> frames;
  Rng rng = make_rng(seed, kFrameStream);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  std::uniform_real_distribution<double> offset(-100.0, 100.0);
  for (int i = 0; i < cfg.n_agents; ++i) {
    if (!cfg.sim.heterogeneous_frames) {
      frames.push_back(FrameTransform{});
      continue;
    }
    const double y = yaw(rng);
    const double ox = offset(rng);
    const double oy = offset(rng);
    frames.push_back(FrameTransform::yaw_offset(y, Vec3(ox, oy, 0.0), 0, i + 1));
  }
  return frames;
}

RunLog run_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.kind == ScenarioKind::Stabilization)
    return run_stabilization(cfg, seed);
  const ScenarioConfig effective = cfg.source.randomize_start ? randomize_source(cfg, seed) : cfg;
  return run_localization(effective, seed);
}

std::vector<Vec3> replay_estimator(const ScenarioConfig& cfg,
                                   const std::vector<MeasurementEvent>& world_events,
                                   const FrameTransform& frame) {
  std::vector<FrameTransform> frames(cfg.n_agents, frame);
  auto params = make_agent_params(cfg, frames);
  Agent agent(std::move(params.front()));
  const FrameTransform to_world = frame.inverse();
  std::vector<Vec3> out;
  VehicleState own;
  for (const auto& e : world_events) {
    agent.receive_cone(transform_measurement(e, frame));
    agent.step(own, e.time, 0.0);
    if (agent.hypothesis())
      out.push_back(to_world.apply(agent.hypothesis()->x));
  }
  return out;
}

std::vector<MeasurementEvent> events_from_runlog(const RunLog& log) {
  std::vector<MeasurementEvent> out;
  for (const auto& r : log.records()) {
    if (r.kind != "event")
      continue;
    const ojson& w = r.payload["world"];
    MeasurementEvent e;
    e.time = r.t;
    e.agent_id = r.agent_id;
    e.frame_id = 0;
    e.cone = ComptonCone{json_vec(w["apex"]), UnitVec3::normalize(json_vec(w["axis"])),
                         w["half_angle"].get<double>()};
    out.push_back(e);
  }
  return out;
}

} // namespace cswarm
