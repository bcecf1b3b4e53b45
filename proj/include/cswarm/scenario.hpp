#pragma once

// Deterministic fixed-step world: source motion, detections, the message bus,
// agents and vehicles. A run is a pure function of (config, seed).

#include "cswarm/agent.hpp"
#include "cswarm/config.hpp"
#include "cswarm/runlog.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cswarm {

enum class Termination { TargetLost, TrackingComplete, SimTimeLimit };

const char* to_string(Termination t);

/// Independent generator for one named stream of a seeded run.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Config with the source start drawn from the seed: a uniform position in
/// the area (static), a circle center keeping the circle inside the area plus
/// a uniform phase (circular). Waypoint scripts are left unchanged.
ScenarioConfig randomize_source(const ScenarioConfig& cfg, std::uint64_t seed);

/// Per-agent frames: identity, or a random yaw and horizontal offset per
/// agent when heterogeneous frames are enabled.
std::vector<FrameTransform> make_frames(const ScenarioConfig& cfg, std::uint64_t seed);

/// Runs the scenario described by `cfg` (localization or stabilization).
RunLog run_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

/// Replays a fixed list of world-frame events through one agent's estimator
/// (NLLS once M cones are in, then cone fusion), with the agent living in the
/// frame given by `frame`. Returns the world-frame hypothesis after each
/// event once tracking has started. Used to check frame equivariance.
std::vector<Vec3> replay_estimator(const ScenarioConfig& cfg,
                                   const std::vector<MeasurementEvent>& world_events,
                                   const FrameTransform& frame);

/// World-frame events recorded in a run log.
std::vector<MeasurementEvent> events_from_runlog(const RunLog& log);

} // namespace cswarm
