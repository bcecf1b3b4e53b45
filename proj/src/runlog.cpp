#include "cswarm/runlog.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace cswarm {

using ojson = nlohmann::ordered_json;

void RunLog::append(double t, std::string kind, int agent_id, ojson payload) {
  if (!records_.empty() && t < records_.back().t)
    throw std::logic_error("run log timestamps must be nondecreasing");
  records_.push_back({t, std::move(kind), agent_id, std::move(payload)});
}

const ojson& RunLog::header() const {
  if (records_.empty() || records_.front().kind != "header")
    throw RunLogSchemaError("run log has no header record");
  return records_.front().payload;
}

void RunLog::write_jsonl(std::ostream& out) const {
  for (const auto& r : records_) {
    ojson line;
    line["t"] = r.t;
    line["kind"] = r.kind;
    line["agent_id"] = r.agent_id;
    line["payload"] = r.payload;
    out << line.dump() << '\n';
  }
}

std::string RunLog::to_jsonl() const {
  std::ostringstream ss;
  write_jsonl(ss);
  return ss.str();
}

RunLog RunLog::read_jsonl(std::istream& in) {
  RunLog log;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty())
      continue;
    ojson line;
    try {
      line = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
      throw RunLogParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!line.is_object() || !line.contains("t") || !line["t"].is_number() ||
        !line.contains("kind") || !line["kind"].is_string() || !line.contains("agent_id") ||
        !line["agent_id"].is_number_integer() || !line.contains("payload"))
      throw RunLogParseError(line_no, "record must have t, kind, agent_id, payload");
    LogRecord r{line["t"].get<double>(), line["kind"].get<std::string>(),
                line["agent_id"].get<int>(), std::move(line["payload"])};
    if (line_no == 1) {
      if (r.kind != "header")
        throw RunLogSchemaError("first record must be the header");
      const auto& p = r.payload;
      if (!p.contains("schema") || p["schema"] != kRunLogSchema)
        throw RunLogSchemaError("not a compton-swarm run log");
      if (!p.contains("version") || p["version"] != kRunLogSchemaVersion)
        throw RunLogSchemaError("run log schema version mismatch: expected " +
                                std::to_string(kRunLogSchemaVersion) + ", found " +
                                (p.contains("version") ? p["version"].dump() : "none"));
    }
    if (!log.records_.empty() && r.t < log.records_.back().t)
      throw RunLogParseError(line_no, "timestamp goes backwards");
    log.records_.push_back(std::move(r));
  }
  if (log.records_.empty())
    throw RunLogParseError(line_no, "empty run log");
  return log;
}

RunLog RunLog::from_jsonl(const std::string& text) {
  std::istringstream ss(text);
  return read_jsonl(ss);
}

} // namespace cswarm
