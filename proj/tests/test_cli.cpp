#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(CSWARM_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0)
    r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cswarm_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir) {
  const fs::path p = dir / "short.json";
  std::ofstream(p) << R"({"n_agents": 3,
    "detector": {"intrinsic_efficiency": 0.006},
    "fusion": {"q": 0.3},
    "source": {"randomize_start": true},
    "termination": {"tracking_limit": 20, "max_sim_time": 300}})";
  return p;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r'))
    s.pop_back();
  return s;
}

} // namespace

TEST_CASE("run writes a run log and metrics, metrics recompute matches") {
  TempDir tmp;
  const fs::path cfg = write_config(tmp.path);
  const fs::path out = tmp.path / "run";
  const Result r = cli("run --config " + cfg.string() + " --seed 5 --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(trim(r.out) == out.string());
  REQUIRE(fs::exists(out / "runlog.jsonl"));
  REQUIRE(fs::exists(out / "metrics.json"));

  const Result m = cli("metrics --runlog " + (out / "runlog.jsonl").string());
  CHECK(m.code == 0);
  CHECK(m.out == slurp(out / "metrics.json"));
  const Result ms = cli("metrics --truth-source script --runlog " + (out / "runlog.jsonl").string());
  CHECK(ms.code == 0);
  CHECK(ms.out == m.out);

  // a second run with the same seed is byte-identical
  const fs::path out2 = tmp.path / "run2";
  REQUIRE(cli("run --config " + cfg.string() + " --seed 5 --out " + out2.string()).code == 0);
  CHECK(slurp(out / "runlog.jsonl") == slurp(out2 / "runlog.jsonl"));

  for (const char* kind : {"paths", "spacing", "speed", "error"}) {
    const Result p = cli("plotdata --kind " + std::string(kind) + " --runlog " +
                         (out / "runlog.jsonl").string());
    CHECK(p.code == 0);
    CHECK(!p.out.empty());
  }
  CHECK(cli("plotdata --kind heat --runlog " + (out / "runlog.jsonl").string()).code != 0);

  // tampered metrics are detected
  std::ofstream(out / "metrics.json") << "{}\n";
  CHECK(cli("metrics --runlog " + (out / "runlog.jsonl").string()).code == 1);
}

TEST_CASE("default output directory is stamped under COMPTON_SWARM_OUT") {
  TempDir tmp;
  const fs::path cfg = write_config(tmp.path);
  const std::string cmd = "COMPTON_SWARM_OUT=" + (tmp.path / "base").string() + " " +
                          std::string(CSWARM_CLI_PATH) + " run --config " + cfg.string() +
                          " --seed 9 > " + (tmp.path / "stdout.txt").string() + " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  const std::string dir = trim(slurp(tmp.path / "stdout.txt"));
  CHECK(dir.rfind((tmp.path / "base").string() + "/", 0) == 0);
  CHECK(dir.size() > 4);
  CHECK(dir.substr(dir.size() - 2) == "-9");
  CHECK(fs::exists(fs::path(dir) / "runlog.jsonl"));
}

TEST_CASE("config errors exit with code 2") {
  TempDir tmp;
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"flock": {"v": -3}})";
  CHECK(cli("run --config " + bad.string() + " --seed 1 --out " + (tmp.path / "x").string()).code == 2);
  CHECK(cli("run --seed 1").code != 0);
}

TEST_CASE("montecarlo writes summary, per-run table and metrics") {
  TempDir tmp;
  const fs::path cfg = write_config(tmp.path);
  const fs::path a = tmp.path / "mc1";
  const fs::path b = tmp.path / "mc2";
  REQUIRE(cli("montecarlo --config " + cfg.string() + " --runs 3 --seed-base 20 --jobs 1 --out " +
              a.string()).code == 0);
  REQUIRE(cli("montecarlo --config " + cfg.string() + " --runs 3 --seed-base 20 --jobs 2 --out " +
              b.string()).code == 0);
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(slurp(a / "runs.csv") == slurp(b / "runs.csv"));
  for (int s = 20; s < 23; ++s)
    CHECK(fs::exists(a / "runs" / std::to_string(s) / "metrics.json"));
}
