#include "cswarm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cswarm {

using nlohmann::json;

const char* to_string(SourceMotion m) {
  switch (m) {
  case SourceMotion::Static:
    return "static";
  case SourceMotion::Circular:
    return "circular";
  case SourceMotion::Waypoints:
    return "waypoints";
  }
  return "unknown";
}

SourceState SourceScript::at(double t, double activity) const {
  SourceState s;
  s.activity = activity;
  switch (type) {
  case SourceMotion::Static:
    s.position = position;
    break;
  case SourceMotion::Circular: {
    const double phi = phase + speed / radius * t;
    s.position = center + radius * Vec3(std::cos(phi), std::sin(phi), 0.0);
    s.velocity = speed * Vec3(-std::sin(phi), std::cos(phi), 0.0);
    break;
  }
  case SourceMotion::Waypoints: {
    s.position = waypoints.front();
    if (waypoints.size() < 2 || speed <= 0.0)
      break;
    double total = 0.0;
    for (size_t i = 1; i < waypoints.size(); ++i)
      total += (waypoints[i] - waypoints[i - 1]).norm();
    const double closing = loop ? (waypoints.front() - waypoints.back()).norm() : 0.0;
    double s_arc = speed * t;
    if (loop)
      s_arc = std::fmod(s_arc, total + closing);
    else if (s_arc >= total) {
      s.position = waypoints.back();
      break;
    }
    const size_t n = waypoints.size();
    const size_t segments = loop ? n : n - 1;
    for (size_t i = 0; i < segments; ++i) {
      const Vec3& a = waypoints[i];
      const Vec3& b = waypoints[(i + 1) % n];
      const double len = (b - a).norm();
      if (s_arc <= len && len > 0.0) {
        s.position = a + s_arc / len * (b - a);
        s.velocity = speed * (b - a) / len;
        break;
      }
      s_arc -= len;
    }
    break;
  }
  }
  return s;
}

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class ObjectReader {
public:
  ObjectReader(const json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ && !obj_->is_object())
      throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_)
      return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number())
        throw ConfigError(field(key), "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out))
        throw ConfigError(field(key), "must be finite");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer())
        throw ConfigError(field(key), "must be an integer");
      out = v->get<int>();
    }
  }

  void uint64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw ConfigError(field(key), "must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean())
        throw ConfigError(field(key), "must be a boolean");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string())
        throw ConfigError(field(key), "must be a string");
      out = v->get<std::string>();
    }
  }

  static Vec3 to_vec3(const json& v, const std::string& f) {
    if (!v.is_array() || v.size() != 3)
      throw ConfigError(f, "must be an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number())
        throw ConfigError(f, "must be an array of 3 numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  void vec3(const std::string& key, Vec3& out) {
    if (const json* v = find(key))
      out = to_vec3(*v, field(key));
  }

  void vec3_list(const std::string& key, std::vector<Vec3>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array())
        throw ConfigError(field(key), "must be an array of points");
      out.clear();
      for (size_t i = 0; i < v->size(); ++i)
        out.push_back(to_vec3((*v)[i], field(key) + "[" + std::to_string(i) + "]"));
    }
  }

  ObjectReader child(const std::string& key) { return ObjectReader(find(key), field(key)); }

  void finish() const {
    if (!obj_)
      return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError(field(it.key()), "unknown key");
  }

private:
  const json* obj_;
  std::string path_;
  std::set<std::string> seen_;
};

// Module validators report "section.field: message"; lift that into a
// ConfigError carrying the field.
template <class F>
void lift(F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon == std::string::npos)
      throw ConfigError("<config>", msg);
    throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok)
    throw ConfigError(field, what);
}

void read_motion(ObjectReader r, SourceScript& m) {
  std::string type = to_string(m.type);
  r.string("type", type);
  if (type == "static") {
    m.type = SourceMotion::Static;
    r.vec3("position", m.position);
  } else if (type == "circular") {
    m.type = SourceMotion::Circular;
    r.vec3("center", m.center);
    r.number("radius", m.radius);
    r.number("speed", m.speed);
    r.number("phase", m.phase);
  } else if (type == "waypoints") {
    m.type = SourceMotion::Waypoints;
    r.vec3_list("waypoints", m.waypoints);
    r.number("speed", m.speed);
    r.boolean("loop", m.loop);
  } else {
    throw ConfigError(r.field("type"), "must be one of static, circular, waypoints");
  }
  r.finish();
}

} // namespace

void ScenarioConfig::validate() const {
  require(area.x_max > area.x_min, "area.x_max", "must be > area.x_min");
  require(area.y_max > area.y_min, "area.y_max", "must be > area.y_min");
  require(n_agents >= 1 && n_agents <= 64, "n_agents", "must be in [1, 64]");
  lift([&] { flock.validate(); });
  require(search.lane_spacing > 0.0, "search.lane_spacing", "must be > 0");
  require(search.speed > 0.0, "search.speed", "must be > 0");
  require(search.yaw_rate >= 0.0, "search.yaw_rate", "must be >= 0");
  lift([&] { fusion.validate(); });
  lift([&] { nlls.solver.validate(); });
  require(nlls.z_max >= nlls.z_min, "nlls.z_max", "must be >= nlls.z_min");
  lift([&] { detector.validate(); });
  lift([&] { vehicle.limits.validate(); });
  require(vehicle.gains.kp > 0.0, "vehicle.kp", "must be > 0");
  require(vehicle.gains.kv > 0.0, "vehicle.kv", "must be > 0");
  require(vehicle.gains.lookahead >= 0, "vehicle.lookahead", "must be >= 0");
  require(source.activity > 0.0, "source.activity", "must be > 0");
  const SourceScript& m = source.motion;
  if (m.type == SourceMotion::Circular) {
    require(m.radius > 0.0, "source.motion.radius", "must be > 0");
    require(m.speed >= 0.0, "source.motion.speed", "must be >= 0");
  }
  if (m.type == SourceMotion::Waypoints) {
    require(!m.waypoints.empty(), "source.motion.waypoints", "must contain at least one point");
    require(m.speed >= 0.0, "source.motion.speed", "must be >= 0");
  }
  require(termination.loss_timeout > 0.0, "termination.loss_timeout", "must be > 0");
  require(termination.tracking_limit > 0.0, "termination.tracking_limit", "must be > 0");
  require(termination.max_sim_time > 0.0, "termination.max_sim_time", "must be > 0");
  require(sim.dt > 0.0, "sim.dt", "must be > 0");
  require(sim.bus_latency >= 0.0, "sim.bus_latency", "must be >= 0");
  require(sim.log_interval >= sim.dt, "sim.log_interval", "must be >= sim.dt");
  require(stabilization.step_period > 0.0, "stabilization.step_period", "must be > 0");
  require(stabilization.duration > 0.0, "stabilization.duration", "must be > 0");
  require(stabilization.spawn_radius >= 0.0, "stabilization.spawn_radius", "must be >= 0");
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig cfg;
  ObjectReader root(&doc, "");

  int version = kConfigSchemaVersion;
  root.integer("schema_version", version);
  if (version != kConfigSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version) +
                                            " (expected " +
                                            std::to_string(kConfigSchemaVersion) + ")");
  std::string kind = "localization";
  root.string("kind", kind);
  if (kind == "localization")
    cfg.kind = ScenarioKind::Localization;
  else if (kind == "stabilization")
    cfg.kind = ScenarioKind::Stabilization;
  else
    throw ConfigError("kind", "must be localization or stabilization");
  root.uint64("seed", cfg.seed);
  root.integer("n_agents", cfg.n_agents);

  {
    auto r = root.child("area");
    r.number("x_min", cfg.area.x_min);
    r.number("x_max", cfg.area.x_max);
    r.number("y_min", cfg.area.y_min);
    r.number("y_max", cfg.area.y_max);
    r.finish();
  }
  {
    auto r = root.child("flock");
    r.number("r", cfg.flock.r);
    r.number("v", cfg.flock.v);
    r.integer("K", cfg.flock.K);
    r.number("dt", cfg.flock.dt);
    r.number("beta_max", cfg.flock.beta_max);
    r.number("deadband", cfg.flock.deadband);
    r.number("height", cfg.flock.height);
    r.number("planning_rate", cfg.flock.planning_rate);
    r.finish();
  }
  {
    auto r = root.child("search");
    r.number("lane_spacing", cfg.search.lane_spacing);
    r.number("speed", cfg.search.speed);
    r.number("yaw_rate", cfg.search.yaw_rate);
    r.finish();
  }
  {
    auto r = root.child("fusion");
    r.number("rho", cfg.fusion.rho);
    r.number("off_axis_factor", cfg.fusion.off_axis_factor);
    r.number("q", cfg.fusion.q);
    r.number("p0", cfg.fusion.p0);
    r.integer("M", cfg.fusion.M);
    r.finish();
  }
  {
    auto r = root.child("nlls");
    r.integer("grid", cfg.nlls.solver.grid);
    r.number("start_height", cfg.nlls.solver.start_height);
    r.integer("max_iterations", cfg.nlls.solver.max_iterations);
    r.number("grad_tol", cfg.nlls.solver.grad_tol);
    r.number("step_tol", cfg.nlls.solver.step_tol);
    r.number("initial_damping", cfg.nlls.solver.initial_damping);
    r.number("z_min", cfg.nlls.z_min);
    r.number("z_max", cfg.nlls.z_max);
    r.finish();
  }
  {
    auto r = root.child("detector");
    r.number("sensitive_area", cfg.detector.sensitive_area);
    r.number("intrinsic_efficiency", cfg.detector.intrinsic_efficiency);
    r.number("fov_half_angle", cfg.detector.fov_half_angle);
    r.number("angular_noise_sigma", cfg.detector.angular_noise_sigma);
    r.number("min_theta", cfg.detector.min_theta);
    r.number("max_theta", cfg.detector.max_theta);
    r.number("rate_cap", cfg.detector.rate_cap);
    r.vec3("mount_axis", cfg.detector.mount_axis);
    r.finish();
  }
  {
    auto r = root.child("vehicle");
    r.number("v_max", cfg.vehicle.limits.v_max);
    r.number("a_max", cfg.vehicle.limits.a_max);
    r.number("yaw_rate_max", cfg.vehicle.limits.yaw_rate_max);
    r.number("kp", cfg.vehicle.gains.kp);
    r.number("kv", cfg.vehicle.gains.kv);
    r.integer("lookahead", cfg.vehicle.gains.lookahead);
    r.finish();
  }
  {
    auto r = root.child("source");
    r.number("activity", cfg.source.activity);
    r.boolean("randomize_start", cfg.source.randomize_start);
    read_motion(r.child("motion"), cfg.source.motion);
    r.finish();
  }
  {
    auto r = root.child("termination");
    r.number("loss_timeout", cfg.termination.loss_timeout);
    r.number("tracking_limit", cfg.termination.tracking_limit);
    r.number("max_sim_time", cfg.termination.max_sim_time);
    r.boolean("re_search", cfg.termination.re_search);
    r.finish();
  }
  {
    auto r = root.child("sim");
    r.number("dt", cfg.sim.dt);
    r.number("bus_latency", cfg.sim.bus_latency);
    r.number("log_interval", cfg.sim.log_interval);
    r.boolean("log_states", cfg.sim.log_states);
    r.boolean("heterogeneous_frames", cfg.sim.heterogeneous_frames);
    r.finish();
  }
  {
    auto r = root.child("stabilization");
    r.vec3("hypothesis", cfg.stabilization.hypothesis);
    r.number("step_size", cfg.stabilization.step_size);
    r.number("step_period", cfg.stabilization.step_period);
    r.number("duration", cfg.stabilization.duration);
    r.number("spawn_radius", cfg.stabilization.spawn_radius);
    r.finish();
  }
  root.finish();

  cfg.flock.n_agents = cfg.n_agents;
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<json>", e.what());
  }
  return parse_config(doc);
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

namespace {
ojson vec_json(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }
} // namespace

ojson to_json(const ScenarioConfig& c) {
  ojson j;
  j["schema_version"] = kConfigSchemaVersion;
  j["kind"] = c.kind == ScenarioKind::Localization ? "localization" : "stabilization";
  j["seed"] = c.seed;
  j["n_agents"] = c.n_agents;
  j["area"] = {{"x_min", c.area.x_min}, {"x_max", c.area.x_max},
               {"y_min", c.area.y_min}, {"y_max", c.area.y_max}};
  j["flock"] = {{"r", c.flock.r},
                {"v", c.flock.v},
                {"K", c.flock.K},
                {"dt", c.flock.dt},
                {"beta_max", c.flock.beta_max},
                {"deadband", c.flock.deadband},
                {"height", c.flock.height},
                {"planning_rate", c.flock.planning_rate}};
  j["search"] = {{"lane_spacing", c.search.lane_spacing},
                 {"speed", c.search.speed},
                 {"yaw_rate", c.search.yaw_rate}};
  j["fusion"] = {{"rho", c.fusion.rho},
                 {"off_axis_factor", c.fusion.off_axis_factor},
                 {"q", c.fusion.q},
                 {"p0", c.fusion.p0},
                 {"M", c.fusion.M}};
  j["nlls"] = {{"grid", c.nlls.solver.grid},
               {"start_height", c.nlls.solver.start_height},
               {"max_iterations", c.nlls.solver.max_iterations},
               {"grad_tol", c.nlls.solver.grad_tol},
               {"step_tol", c.nlls.solver.step_tol},
               {"initial_damping", c.nlls.solver.initial_damping},
               {"z_min", c.nlls.z_min},
               {"z_max", c.nlls.z_max}};
  j["detector"] = {{"sensitive_area", c.detector.sensitive_area},
                   {"intrinsic_efficiency", c.detector.intrinsic_efficiency},
                   {"fov_half_angle", c.detector.fov_half_angle},
                   {"angular_noise_sigma", c.detector.angular_noise_sigma},
                   {"min_theta", c.detector.min_theta},
                   {"max_theta", c.detector.max_theta},
                   {"rate_cap", c.detector.rate_cap},
                   {"mount_axis", vec_json(c.detector.mount_axis)}};
  j["vehicle"] = {{"v_max", c.vehicle.limits.v_max},
                  {"a_max", c.vehicle.limits.a_max},
                  {"yaw_rate_max", c.vehicle.limits.yaw_rate_max},
                  {"kp", c.vehicle.gains.kp},
                  {"kv", c.vehicle.gains.kv},
                  {"lookahead", c.vehicle.gains.lookahead}};
  ojson motion;
  const SourceScript& m = c.source.motion;
  motion["type"] = to_string(m.type);
  switch (m.type) {
  case SourceMotion::Static:
    motion["position"] = vec_json(m.position);
    break;
  case SourceMotion::Circular:
    motion["center"] = vec_json(m.center);
    motion["radius"] = m.radius;
    motion["speed"] = m.speed;
    motion["phase"] = m.phase;
    break;
  case SourceMotion::Waypoints: {
    ojson pts = ojson::array();
    for (const auto& p : m.waypoints)
      pts.push_back(vec_json(p));
    motion["waypoints"] = pts;
    motion["speed"] = m.speed;
    motion["loop"] = m.loop;
    break;
  }
  }
  j["source"] = {{"activity", c.source.activity},
                 {"randomize_start", c.source.randomize_start},
                 {"motion", motion}};
  j["termination"] = {{"loss_timeout", c.termination.loss_timeout},
                      {"tracking_limit", c.termination.tracking_limit},
                      {"max_sim_time", c.termination.max_sim_time},
                      {"re_search", c.termination.re_search}};
  j["sim"] = {{"dt", c.sim.dt},
              {"bus_latency", c.sim.bus_latency},
              {"log_interval", c.sim.log_interval},
              {"log_states", c.sim.log_states},
              {"heterogeneous_frames", c.sim.heterogeneous_frames}};
  j["stabilization"] = {{"hypothesis", vec_json(c.stabilization.hypothesis)},
                        {"step_size", c.stabilization.step_size},
                        {"step_period", c.stabilization.step_period},
                        {"duration", c.stabilization.duration},
                        {"spawn_radius", c.stabilization.spawn_radius}};
  return j;
}

} // namespace cswarm
