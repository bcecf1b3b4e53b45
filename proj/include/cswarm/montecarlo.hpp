#pragma once

// Repeated scenario execution over consecutive seeds with a worker pool, and
// the ordered aggregation behind summary.csv.

#include "cswarm/config.hpp"
#include "cswarm/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cswarm {

struct MonteCarloOptions {
  int runs = 1;
  std::uint64_t seed_base = 0;
  int jobs = 1;
};

struct RunOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunMetrics metrics;
};

struct MonteCarloSummary {
  int runs = 0;
  int ok = 0;
  int initialized = 0;
  std::optional<double> time_to_x0_median;
  std::optional<double> time_to_x0_max;
  std::optional<double> tracking_time_avg;
  std::optional<double> tracking_time_max;
  std::optional<double> pooled_error_median;   ///< over every error sample of every run
  std::optional<double> per_run_error_median;  ///< median of per-run medians
  double tracking_complete_fraction = 0.0;     ///< of successful runs
};

struct MonteCarloResult {
  std::vector<RunOutcome> runs; ///< ordered by seed
  MonteCarloSummary summary;
};

/// Config used for one Monte Carlo run: source start randomized from the
/// seed, per-tick state records disabled.
ScenarioConfig montecarlo_run_config(const ScenarioConfig& cfg);

RunOutcome run_one(const ScenarioConfig& cfg, std::uint64_t seed);

/// Runs seeds seed_base .. seed_base + runs - 1 on `jobs` threads. The result
/// does not depend on `jobs`.
MonteCarloResult run_montecarlo(const ScenarioConfig& cfg, const MonteCarloOptions& opts);

MonteCarloSummary summarize(const std::vector<RunOutcome>& runs);

std::string summary_csv(const MonteCarloSummary& s);
std::string runs_csv(const std::vector<RunOutcome>& runs);

} // namespace cswarm
