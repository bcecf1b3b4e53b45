#pragma once

// Append-only record of one simulated scenario, serialized as JSON Lines:
// one {"t", "kind", "agent_id", "payload"} object per line. The first record
// is always a "header" carrying the schema name and version.

#include "json.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cswarm {

inline constexpr const char* kRunLogSchema = "compton-swarm-runlog";
inline constexpr int kRunLogSchemaVersion = 1;

class RunLogParseError : public std::runtime_error {
public:
  RunLogParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class RunLogSchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LogRecord {
  double t = 0.0;
  std::string kind;
  int agent_id = -1;
  nlohmann::ordered_json payload;
};

class RunLog {
public:
  /// Throws std::logic_error if `t` precedes the previous record.
  void append(double t, std::string kind, int agent_id, nlohmann::ordered_json payload);

  const std::vector<LogRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  /// Header payload (the first record); throws RunLogSchemaError if absent.
  const nlohmann::ordered_json& header() const;

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;

  /// Throws RunLogParseError (with line number) or RunLogSchemaError.
  static RunLog read_jsonl(std::istream& in);
  static RunLog from_jsonl(const std::string& text);

private:
  std::vector<LogRecord> records_;
};

} // namespace cswarm
