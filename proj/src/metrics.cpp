#include "cswarm/metrics.hpp"

#include "cswarm/config.hpp"
#include "cswarm/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cswarm {

using ojson = nlohmann::ordered_json;

double median(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunMetrics compute_metrics(const RunLog& log, TruthSource truth_source) {
  const ojson& header = log.header();
  std::optional<ScenarioConfig> echoed;
  if (truth_source == TruthSource::Script)
    echoed = parse_config(nlohmann::json::parse(header.at("config").dump()));
  RunMetrics m;
  m.seed = header.at("seed").get<std::uint64_t>();
  const double limit = header.at("config").at("termination").at("tracking_limit").get<double>();

  // NaN while no tracking segment is open
  double segment_start = std::numeric_limits<double>::quiet_NaN();
  double longest = 0.0;
  auto close_segment = [&](double t) {
    if (!std::isnan(segment_start)) {
      longest = std::max(longest, t - segment_start);
      segment_start = std::numeric_limits<double>::quiet_NaN();
    }
  };

  std::vector<double> errors;
  for (const auto& r : log.records()) {
    if (r.kind == "stage") {
      if (r.payload.at("to") == "tracking") {
        if (!m.time_to_x0)
          m.time_to_x0 = r.t;
        if (std::isnan(segment_start))
          segment_start = r.t;
      }
    } else if (r.kind == "target_lost") {
      close_segment(r.t);
    } else if (r.kind == "termination") {
      close_segment(r.t);
      m.termination_reason = r.payload.at("reason").get<std::string>();
    } else if (r.kind == "hypothesis") {
      const auto& x = r.payload.at("x");
      Vec3 truth;
      if (echoed) {
        truth = echoed->source.motion.at(r.t, echoed->source.activity).position;
      } else {
        const auto& stored = r.payload.at("truth");
        truth = Vec3(stored[0].get<double>(), stored[1].get<double>(), stored[2].get<double>());
      }
      const double e = std::hypot(x[0].get<double>() - truth.x(), x[1].get<double>() - truth.y());
      m.error_series.emplace_back(r.t, e);
      errors.push_back(e);
    }
  }
  m.tracking_time = std::min(longest, limit);
  m.tracking_complete = m.termination_reason == "tracking_complete";
  if (!errors.empty()) {
    m.error_mean = std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
    m.error_median = median(errors);
  }
  return m;
}

namespace {
ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }
std::optional<double> opt_from(const ojson& j) {
  if (j.is_null())
    return std::nullopt;
  return j.get<double>();
}
} // namespace

ojson metrics_to_json(const RunMetrics& m) {
  ojson series = ojson::array();
  for (const auto& [t, e] : m.error_series)
    series.push_back(ojson::array({t, e}));
  return ojson{{"schema_version", 1},
               {"seed", m.seed},
               {"termination_reason", m.termination_reason},
               {"time_to_x0", opt(m.time_to_x0)},
               {"tracking_time", m.tracking_time},
               {"tracking_complete", m.tracking_complete},
               {"error_median", opt(m.error_median)},
               {"error_mean", opt(m.error_mean)},
               {"n_error_samples", m.error_series.size()},
               {"estimation_error_series", series}};
}

RunMetrics metrics_from_json(const ojson& j) {
  RunMetrics m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.termination_reason = j.at("termination_reason").get<std::string>();
  m.time_to_x0 = opt_from(j.at("time_to_x0"));
  m.tracking_time = j.at("tracking_time").get<double>();
  m.tracking_complete = j.at("tracking_complete").get<bool>();
  m.error_median = opt_from(j.at("error_median"));
  m.error_mean = opt_from(j.at("error_mean"));
  for (const auto& p : j.at("estimation_error_series"))
    m.error_series.emplace_back(p[0].get<double>(), p[1].get<double>());
  return m;
}

std::string metrics_json_string(const RunMetrics& m) { return metrics_to_json(m).dump(2) + "\n"; }

namespace {

std::string num(const ojson& j) { return j.is_number() ? format_number(j.get<double>()) : ""; }

std::string agent_header(int n) {
  std::string h = "t";
  for (int i = 0; i < n; ++i)
    h += ",agent_" + std::to_string(i);
  return h + "\n";
}

// State records grouped by the truth record that opens each logged tick.
template <class RowFn>
void for_each_tick(const RunLog& log, int n, RowFn&& row) {
  const auto& recs = log.records();
  for (size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].kind != "truth")
      continue;
    std::vector<const LogRecord*> states(n, nullptr);
    for (size_t j = i + 1; j < recs.size() && recs[j].kind == "state"; ++j)
      if (recs[j].agent_id >= 0 && recs[j].agent_id < n)
        states[recs[j].agent_id] = &recs[j];
    row(recs[i], states);
  }
}

} // namespace

std::string plot_data_csv(const RunLog& log, const std::string& kind) {
  const int n = log.header().at("n_agents").get<int>();
  std::ostringstream out;
  if (kind == "paths") {
    out << "t,series,x,y\n";
    for_each_tick(log, n, [&](const LogRecord& truth, const std::vector<const LogRecord*>& st) {
      const std::string t = format_number(truth.t);
      ojson hyp = nullptr;
      for (int i = 0; i < n; ++i) {
        const ojson pos = st[i] ? st[i]->payload.at("position") : ojson(nullptr);
        out << t << ",agent_" << i << ',' << (pos.is_array() ? num(pos[0]) : "") << ','
            << (pos.is_array() ? num(pos[1]) : "") << '\n';
        if (hyp.is_null() && st[i] && !st[i]->payload.at("hypothesis").is_null())
          hyp = st[i]->payload.at("hypothesis");
      }
      out << t << ",hypothesis," << (hyp.is_array() ? num(hyp[0]) : "") << ','
          << (hyp.is_array() ? num(hyp[1]) : "") << '\n';
      const ojson& p = truth.payload.at("position");
      out << t << ",truth," << num(p[0]) << ',' << num(p[1]) << '\n';
    });
  } else if (kind == "spacing" || kind == "speed") {
    const char* field = kind == "spacing" ? "spacing_error" : "speed";
    out << agent_header(n);
    for_each_tick(log, n, [&](const LogRecord& truth, const std::vector<const LogRecord*>& st) {
      out << format_number(truth.t);
      for (int i = 0; i < n; ++i)
        out << ',' << (st[i] ? num(st[i]->payload.at(field)) : "");
      out << '\n';
    });
  } else if (kind == "error") {
    out << "t,agent_id,error\n";
    for (const auto& r : log.records()) {
      if (r.kind != "hypothesis")
        continue;
      const auto& x = r.payload.at("x");
      const auto& truth = r.payload.at("truth");
      const double e = std::hypot(x[0].get<double>() - truth[0].get<double>(),
                                  x[1].get<double>() - truth[1].get<double>());
      out << format_number(r.t) << ',' << r.agent_id << ',' << format_number(e) << '\n';
    }
  } else {
    throw std::invalid_argument("unknown plot kind '" + kind +
                                "' (expected paths, spacing, speed or error)");
  }
  return out.str();
}

} // namespace cswarm
