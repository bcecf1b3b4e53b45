#pragma once

// Per-run metrics recomputed from a run log, and tidy CSV series for plots.

#include "cswarm/runlog.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cswarm {

struct RunMetrics {
  std::uint64_t seed = 0;
  std::string termination_reason;
  std::optional<double> time_to_x0;
  double tracking_time = 0.0;  ///< longest continuous tracking segment, capped
  bool tracking_complete = false;
  /// (t, horizontal distance between hypothesis and truth) per hypothesis update.
  std::vector<std::pair<double, double>> error_series;
  std::optional<double> error_median;
  std::optional<double> error_mean;
};

/// Median of a non-empty sample (mean of the two middle values when even).
double median(std::vector<double> values);

/// Where the true source position for each error sample comes from: the
/// value stored in the hypothesis record, or the source script echoed in the
/// header evaluated at the record time.
enum class TruthSource { Records, Script };

RunMetrics compute_metrics(const RunLog& log, TruthSource truth = TruthSource::Records);

nlohmann::ordered_json metrics_to_json(const RunMetrics& m);
RunMetrics metrics_from_json(const nlohmann::ordered_json& j);
/// Canonical metrics.json text (pretty-printed, trailing newline).
std::string metrics_json_string(const RunMetrics& m);

/// kind: paths | spacing | speed | error. Throws std::invalid_argument on an
/// unknown kind.
std::string plot_data_csv(const RunLog& log, const std::string& kind);

} // namespace cswarm
