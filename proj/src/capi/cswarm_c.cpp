#include "cswarm/cswarm.h"

#include "cswarm/config.hpp"
#include "cswarm/metrics.hpp"
#include "cswarm/montecarlo.hpp"
#include "cswarm/runlog.hpp"
#include "cswarm/scenario.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

struct cswarm_config {
  cswarm::ScenarioConfig cfg;
};

struct cswarm_runlog {
  cswarm::RunLog log;
};

struct cswarm_batch {
  cswarm::MonteCarloResult result;
};

namespace {

thread_local std::string g_last_error;

cswarm_status fail(cswarm_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Maps exceptions escaping the C++ core to status codes.
template <class F>
cswarm_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const cswarm::ConfigError& e) {
    return fail(CSWARM_ERR_CONFIG, e.what());
  } catch (const cswarm::RunLogParseError& e) {
    return fail(CSWARM_ERR_PARSE, e.what());
  } catch (const cswarm::RunLogSchemaError& e) {
    return fail(CSWARM_ERR_SCHEMA, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CSWARM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CSWARM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CSWARM_ERR_INTERNAL, "unknown error");
  }
}

#define CSWARM_REQUIRE(cond)                                                 \
  do {                                                                       \
    if (!(cond))                                                             \
      return fail(CSWARM_ERR_INVALID_ARGUMENT, "null argument: " #cond);     \
  } while (0)

} // namespace

extern "C" {

const char* cswarm_version(void) { return "0.1.0"; }

const char* cswarm_last_error(void) { return g_last_error.c_str(); }

void cswarm_string_free(char* s) { std::free(s); }

cswarm_status cswarm_config_load_file(const char* path, cswarm_config** out) {
  CSWARM_REQUIRE(path && out);
  return guarded([&] {
    std::ifstream in(path);
    if (!in)
      return fail(CSWARM_ERR_IO, std::string("cannot open ") + path);
    *out = new cswarm_config{cswarm::load_config_file(path)};
    return CSWARM_OK;
  });
}

cswarm_status cswarm_config_load_string(const char* json, cswarm_config** out) {
  CSWARM_REQUIRE(json && out);
  return guarded([&] {
    *out = new cswarm_config{cswarm::parse_config_string(json)};
    return CSWARM_OK;
  });
}

cswarm_status cswarm_config_to_json(const cswarm_config* cfg, char** out) {
  CSWARM_REQUIRE(cfg && out);
  return guarded([&] {
    *out = dup_string(cswarm::to_json(cfg->cfg).dump(2));
    return CSWARM_OK;
  });
}

void cswarm_config_free(cswarm_config* cfg) { delete cfg; }

cswarm_status cswarm_run(const cswarm_config* cfg, uint64_t seed, cswarm_runlog** out) {
  CSWARM_REQUIRE(cfg && out);
  return guarded([&] {
    *out = new cswarm_runlog{cswarm::run_scenario(cfg->cfg, seed)};
    return CSWARM_OK;
  });
}

cswarm_status cswarm_runlog_load_file(const char* path, cswarm_runlog** out) {
  CSWARM_REQUIRE(path && out);
  return guarded([&] {
    std::ifstream in(path);
    if (!in)
      return fail(CSWARM_ERR_IO, std::string("cannot open ") + path);
    *out = new cswarm_runlog{cswarm::RunLog::read_jsonl(in)};
    return CSWARM_OK;
  });
}

cswarm_status cswarm_runlog_load_string(const char* jsonl, cswarm_runlog** out) {
  CSWARM_REQUIRE(jsonl && out);
  return guarded([&] {
    *out = new cswarm_runlog{cswarm::RunLog::from_jsonl(jsonl)};
    return CSWARM_OK;
  });
}

cswarm_status cswarm_runlog_write_file(const cswarm_runlog* log, const char* path) {
  CSWARM_REQUIRE(log && path);
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out)
      return fail(CSWARM_ERR_IO, std::string("cannot write ") + path);
    log->log.write_jsonl(out);
    out.close();
    if (!out)
      return fail(CSWARM_ERR_IO, std::string("write failed: ") + path);
    return CSWARM_OK;
  });
}

cswarm_status cswarm_runlog_to_string(const cswarm_runlog* log, char** out) {
  CSWARM_REQUIRE(log && out);
  return guarded([&] {
    *out = dup_string(log->log.to_jsonl());
    return CSWARM_OK;
  });
}

cswarm_status cswarm_runlog_record_count(const cswarm_runlog* log, size_t* out) {
  CSWARM_REQUIRE(log && out);
  *out = log->log.records().size();
  return CSWARM_OK;
}

cswarm_status cswarm_runlog_initialized(const cswarm_runlog* log, int* out) {
  CSWARM_REQUIRE(log && out);
  *out = 0;
  if (log->log.empty())
    return CSWARM_OK;
  // stabilization runs hold a given hypothesis from the start
  const auto& header = log->log.records().front().payload;
  if (header.contains("config") && header["config"].value("kind", "") == "stabilization") {
    *out = 1;
    return CSWARM_OK;
  }
  for (const auto& r : log->log.records())
    if (r.kind == "stage" && r.payload.value("to", "") == "tracking") {
      *out = 1;
      break;
    }
  return CSWARM_OK;
}

cswarm_status cswarm_runlog_metrics_json(const cswarm_runlog* log, cswarm_truth_source truth,
                                         char** out) {
  CSWARM_REQUIRE(log && out);
  return guarded([&] {
    const auto source =
        truth == CSWARM_TRUTH_SCRIPT ? cswarm::TruthSource::Script : cswarm::TruthSource::Records;
    *out = dup_string(cswarm::metrics_json_string(cswarm::compute_metrics(log->log, source)));
    return CSWARM_OK;
  });
}

cswarm_status cswarm_runlog_plotdata_csv(const cswarm_runlog* log, const char* kind, char** out) {
  CSWARM_REQUIRE(log && kind && out);
  return guarded([&] {
    *out = dup_string(cswarm::plot_data_csv(log->log, kind));
    return CSWARM_OK;
  });
}

void cswarm_runlog_free(cswarm_runlog* log) { delete log; }

cswarm_status cswarm_montecarlo(const cswarm_config* cfg, int runs, uint64_t seed_base, int jobs,
                                cswarm_batch** out) {
  CSWARM_REQUIRE(cfg && out);
  if (runs < 1)
    return fail(CSWARM_ERR_INVALID_ARGUMENT, "runs must be >= 1");
  return guarded([&] {
    cswarm::MonteCarloOptions opts;
    opts.runs = runs;
    opts.seed_base = seed_base;
    opts.jobs = jobs;
    *out = new cswarm_batch{cswarm::run_montecarlo(cfg->cfg, opts)};
    if ((*out)->result.summary.ok == 0)
      return fail(CSWARM_ERR_RUN_FAILED, "all runs failed; first error: " +
                                             (*out)->result.runs.front().error);
    return CSWARM_OK;
  });
}

cswarm_status cswarm_batch_summary_csv(const cswarm_batch* batch, char** out) {
  CSWARM_REQUIRE(batch && out);
  return guarded([&] {
    *out = dup_string(cswarm::summary_csv(batch->result.summary));
    return CSWARM_OK;
  });
}

cswarm_status cswarm_batch_runs_csv(const cswarm_batch* batch, char** out) {
  CSWARM_REQUIRE(batch && out);
  return guarded([&] {
    *out = dup_string(cswarm::runs_csv(batch->result.runs));
    return CSWARM_OK;
  });
}

cswarm_status cswarm_batch_run_count(const cswarm_batch* batch, size_t* out) {
  CSWARM_REQUIRE(batch && out);
  *out = batch->result.runs.size();
  return CSWARM_OK;
}

cswarm_status cswarm_batch_run_seed(const cswarm_batch* batch, size_t index, uint64_t* out) {
  CSWARM_REQUIRE(batch && out);
  if (index >= batch->result.runs.size())
    return fail(CSWARM_ERR_INVALID_ARGUMENT, "run index out of range");
  *out = batch->result.runs[index].seed;
  return CSWARM_OK;
}

cswarm_status cswarm_batch_run_metrics_json(const cswarm_batch* batch, size_t index, int* ok,
                                            char** out) {
  CSWARM_REQUIRE(batch && ok && out);
  if (index >= batch->result.runs.size())
    return fail(CSWARM_ERR_INVALID_ARGUMENT, "run index out of range");
  return guarded([&] {
    const auto& run = batch->result.runs[index];
    *ok = run.ok ? 1 : 0;
    *out = run.ok ? dup_string(cswarm::metrics_json_string(run.metrics)) : nullptr;
    return CSWARM_OK;
  });
}

void cswarm_batch_free(cswarm_batch* batch) { delete batch; }

} // extern "C"
