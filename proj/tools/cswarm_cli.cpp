// compton-swarm: run, montecarlo, metrics and plotdata subcommands on top of
// the C interface.

#include "cswarm/cswarm.h"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfigError = 2, kNeverInitialized = 3 };

struct CString {
  char* p = nullptr;
  ~CString() { cswarm_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using ConfigPtr = std::unique_ptr<cswarm_config, decltype(&cswarm_config_free)>;
using RunLogPtr = std::unique_ptr<cswarm_runlog, decltype(&cswarm_runlog_free)>;
using BatchPtr = std::unique_ptr<cswarm_batch, decltype(&cswarm_batch_free)>;

int report(cswarm_status st, const std::string& context) {
  std::cerr << "error: " << context << ": " << cswarm_last_error() << "\n";
  return st == CSWARM_ERR_CONFIG ? kConfigError : kFailure;
}

bool write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path default_out_dir(const std::string& tag) {
  const char* root = std::getenv("COMPTON_SWARM_OUT");
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  return fs::path(root && *root ? root : "out") / (std::string(stamp) + "-" + tag);
}

bool make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << dir.string() << ": " << ec.message() << "\n";
    return false;
  }
  return true;
}

ConfigPtr load_config(const std::string& path, cswarm_status& st) {
  cswarm_config* cfg = nullptr;
  st = cswarm_config_load_file(path.c_str(), &cfg);
  return ConfigPtr(cfg, &cswarm_config_free);
}

int cmd_run(const std::string& config_path, std::uint64_t seed, std::string out_dir) {
  cswarm_status st;
  ConfigPtr cfg = load_config(config_path, st);
  if (st != CSWARM_OK)
    return report(st, config_path);

  cswarm_runlog* raw = nullptr;
  st = cswarm_run(cfg.get(), seed, &raw);
  RunLogPtr log(raw, &cswarm_runlog_free);
  if (st != CSWARM_OK)
    return report(st, "run");

  const fs::path dir = out_dir.empty() ? default_out_dir(std::to_string(seed)) : fs::path(out_dir);
  if (!make_dir(dir))
    return kFailure;
  st = cswarm_runlog_write_file(log.get(), (dir / "runlog.jsonl").c_str());
  if (st != CSWARM_OK)
    return report(st, "runlog");
  CString metrics;
  st = cswarm_runlog_metrics_json(log.get(), CSWARM_TRUTH_RECORDS, &metrics.p);
  if (st != CSWARM_OK)
    return report(st, "metrics");
  if (!write_text(dir / "metrics.json", metrics.str()))
    return kFailure;

  int initialized = 0;
  cswarm_runlog_initialized(log.get(), &initialized);
  std::cout << dir.string() << "\n";
  if (!initialized) {
    std::cerr << "initial hypothesis never computed\n";
    return kNeverInitialized;
  }
  return kOk;
}

int cmd_montecarlo(const std::string& config_path, int runs, std::uint64_t seed_base, int jobs,
                   std::string out_dir) {
  cswarm_status st;
  ConfigPtr cfg = load_config(config_path, st);
  if (st != CSWARM_OK)
    return report(st, config_path);

  cswarm_batch* raw = nullptr;
  st = cswarm_montecarlo(cfg.get(), runs, seed_base, jobs, &raw);
  BatchPtr batch(raw, &cswarm_batch_free);
  if (!batch)
    return report(st, "montecarlo");
  const bool all_failed = st == CSWARM_ERR_RUN_FAILED;
  if (st != CSWARM_OK && !all_failed)
    return report(st, "montecarlo");

  const fs::path dir = out_dir.empty() ? default_out_dir("mc" + std::to_string(seed_base))
                                       : fs::path(out_dir);
  if (!make_dir(dir))
    return kFailure;
  CString summary, rows;
  cswarm_batch_summary_csv(batch.get(), &summary.p);
  cswarm_batch_runs_csv(batch.get(), &rows.p);
  if (!write_text(dir / "summary.csv", summary.str()) || !write_text(dir / "runs.csv", rows.str()))
    return kFailure;

  size_t count = 0;
  cswarm_batch_run_count(batch.get(), &count);
  for (size_t i = 0; i < count; ++i) {
    std::uint64_t seed = 0;
    int ok = 0;
    CString metrics;
    cswarm_batch_run_seed(batch.get(), i, &seed);
    cswarm_batch_run_metrics_json(batch.get(), i, &ok, &metrics.p);
    if (!ok)
      continue;
    const fs::path run_dir = dir / "runs" / std::to_string(seed);
    if (!make_dir(run_dir) || !write_text(run_dir / "metrics.json", metrics.str()))
      return kFailure;
  }
  std::cout << dir.string() << "\n";
  if (all_failed) {
    std::cerr << "error: " << cswarm_last_error() << "\n";
    return kFailure;
  }
  return kOk;
}

int cmd_metrics(const std::string& runlog_path, const std::string& truth) {
  cswarm_runlog* raw = nullptr;
  const cswarm_status st = cswarm_runlog_load_file(runlog_path.c_str(), &raw);
  RunLogPtr log(raw, &cswarm_runlog_free);
  if (st != CSWARM_OK)
    return report(st, runlog_path);

  CString metrics;
  const auto source = truth == "script" ? CSWARM_TRUTH_SCRIPT : CSWARM_TRUTH_RECORDS;
  if (cswarm_runlog_metrics_json(log.get(), source, &metrics.p) != CSWARM_OK)
    return report(CSWARM_ERR_INTERNAL, "metrics");
  std::cout << metrics.str();

  const fs::path stored = fs::path(runlog_path).parent_path() / "metrics.json";
  if (fs::exists(stored)) {
    if (read_text(stored) != metrics.str()) {
      std::cerr << "mismatch: recomputed metrics differ from " << stored.string() << "\n";
      return kFailure;
    }
    std::cerr << "match: " << stored.string() << "\n";
  }
  return kOk;
}

int cmd_plotdata(const std::string& runlog_path, const std::string& kind) {
  cswarm_runlog* raw = nullptr;
  cswarm_status st = cswarm_runlog_load_file(runlog_path.c_str(), &raw);
  RunLogPtr log(raw, &cswarm_runlog_free);
  if (st != CSWARM_OK)
    return report(st, runlog_path);
  CString csv;
  st = cswarm_runlog_plotdata_csv(log.get(), kind.c_str(), &csv.p);
  if (st != CSWARM_OK)
    return report(st, "plotdata");
  std::cout << csv.str();
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compton-camera swarm localization simulator"};
  app.set_version_flag("--version", std::string(cswarm_version()));
  app.require_subcommand(1);

  std::string config, out, runlog, kind, truth = "records";
  std::uint64_t seed = 0, seed_base = 0;
  int runs = 1, jobs = 1;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Random seed")->required();
  run->add_option("--out", out, "Output directory");

  auto* mc = app.add_subcommand("montecarlo", "Run consecutive seeds and aggregate");
  mc->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  mc->add_option("--runs", runs, "Number of runs")->required()->check(CLI::PositiveNumber);
  mc->add_option("--seed-base", seed_base, "First seed")->required();
  mc->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  mc->add_option("--out", out, "Output directory");

  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a run log");
  metrics->add_option("--runlog", runlog, "runlog.jsonl")->required()->check(CLI::ExistingFile);
  metrics->add_option("--truth-source", truth, "records | script")
      ->check(CLI::IsMember({"records", "script"}));

  auto* plot = app.add_subcommand("plotdata", "Emit CSV series from a run log");
  plot->add_option("--runlog", runlog, "runlog.jsonl")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "paths | spacing | speed | error")
      ->required()
      ->check(CLI::IsMember({"paths", "spacing", "speed", "error"}));

  CLI11_PARSE(app, argc, argv);

  if (*run)
    return cmd_run(config, seed, out);
  if (*mc)
    return cmd_montecarlo(config, runs, seed_base, jobs, out);
  if (*metrics)
    return cmd_metrics(runlog, truth);
  return cmd_plotdata(runlog, kind);
}
