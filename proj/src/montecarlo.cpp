#include "cswarm/montecarlo.hpp"

#include "cswarm/format.hpp"
#include "cswarm/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <sstream>
#include <thread>

namespace cswarm {

ScenarioConfig montecarlo_run_config(const ScenarioConfig& cfg) {
  ScenarioConfig out = cfg;
  out.source.randomize_start = true;
  out.sim.log_states = false;
  return out;
}

RunOutcome run_one(const ScenarioConfig& cfg, std::uint64_t seed) {
  RunOutcome out;
  out.seed = seed;
  try {
    out.metrics = compute_metrics(run_scenario(cfg, seed));
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

MonteCarloResult run_montecarlo(const ScenarioConfig& cfg, const MonteCarloOptions& opts) {
  if (opts.runs < 1)
    throw std::invalid_argument("runs must be >= 1");
  if (opts.jobs < 1)
    throw std::invalid_argument("jobs must be >= 1");
  const ScenarioConfig run_cfg = montecarlo_run_config(cfg);
  MonteCarloResult result;
  result.runs.resize(opts.runs);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < opts.runs; i = next++)
      result.runs[i] = run_one(run_cfg, opts.seed_base + static_cast<std::uint64_t>(i));
  };
  const int jobs = std::min(opts.jobs, opts.runs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();

  result.summary = summarize(result.runs);
  return result;
}

MonteCarloSummary summarize(const std::vector<RunOutcome>& runs) {
  MonteCarloSummary s;
  s.runs = static_cast<int>(runs.size());
  std::vector<double> ttx0, tracking, pooled, per_run;
  int complete = 0;
  for (const auto& r : runs) {
    if (!r.ok)
      continue;
    ++s.ok;
    if (r.metrics.tracking_complete)
      ++complete;
    if (!r.metrics.time_to_x0)
      continue;
    ++s.initialized;
    ttx0.push_back(*r.metrics.time_to_x0);
    tracking.push_back(r.metrics.tracking_time);
    for (const auto& [t, e] : r.metrics.error_series)
      pooled.push_back(e);
    if (r.metrics.error_median)
      per_run.push_back(*r.metrics.error_median);
  }
  if (!ttx0.empty()) {
    s.time_to_x0_median = median(ttx0);
    s.time_to_x0_max = *std::max_element(ttx0.begin(), ttx0.end());
    s.tracking_time_avg = std::accumulate(tracking.begin(), tracking.end(), 0.0) / tracking.size();
    s.tracking_time_max = *std::max_element(tracking.begin(), tracking.end());
  }
  if (!pooled.empty())
    s.pooled_error_median = median(pooled);
  if (!per_run.empty())
    s.per_run_error_median = median(per_run);
  s.tracking_complete_fraction = s.ok > 0 ? static_cast<double>(complete) / s.ok : 0.0;
  return s;
}

namespace {
std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}
} // namespace

std::string summary_csv(const MonteCarloSummary& s) {
  std::ostringstream out;
  out << "runs,ok,initialized,time_to_x0_median,time_to_x0_max,tracking_time_avg,"
         "tracking_time_max,error_median,pooled_error_median,per_run_error_median,"
         "tracking_complete_fraction\n";
  out << s.runs << ',' << s.ok << ',' << s.initialized << ',' << cell(s.time_to_x0_median) << ','
      << cell(s.time_to_x0_max) << ',' << cell(s.tracking_time_avg) << ','
      << cell(s.tracking_time_max) << ',' << cell(s.pooled_error_median) << ','
      << cell(s.pooled_error_median) << ',' << cell(s.per_run_error_median) << ','
      << format_number(s.tracking_complete_fraction) << '\n';
  return out.str();
}

std::string runs_csv(const std::vector<RunOutcome>& runs) {
  std::ostringstream out;
  out << "seed,status,termination_reason,time_to_x0,tracking_time,tracking_complete,"
         "error_median,error_mean,n_error_samples,message\n";
  for (const auto& r : runs) {
    const RunMetrics& m = r.metrics;
    out << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << m.termination_reason << ','
        << cell(m.time_to_x0) << ',' << (r.ok ? format_number(m.tracking_time) : "") << ','
        << (r.ok ? (m.tracking_complete ? "true" : "false") : "") << ','
        << cell(m.error_median) << ',' << cell(m.error_mean) << ',' << m.error_series.size()
        << ',' << csv_escape(r.error) << '\n';
  }
  return out.str();
}

} // namespace cswarm
