#include "shoal/config.hpp"

#include "json.hpp"
#include "shoal/io.hpp"

namespace shoal {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + section + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("config: unknown key '" + section + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + section + "." + key + "' has the wrong type");
  }
}

BBox read_box(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 4) throw ConfigError("config: '" + name + "' must be [x, y, w, h]");
  try {
    return BBox(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>());
  } catch (const std::exception& e) {
    throw ConfigError("config: '" + name + "': " + e.what());
  }
}

void read_tracker(const json& t, TrackerConfig& c) {
  const std::string s = "tracker";
  check_keys(t, s, {"tau_match", "tau_ambiguous", "alpha", "k", "population_mode", "spawn_delay",
                    "enable_interaction", "enable_refind", "arena", "boundary_margin",
                    "foreground_is_dark", "fixed_level"});
  read(t, "tau_match", c.tau_match, s);
  read(t, "tau_ambiguous", c.tau_ambiguous, s);
  read(t, "alpha", c.alpha, s);
  read(t, "k", c.k, s);
  read(t, "spawn_delay", c.spawn_delay, s);
  read(t, "enable_interaction", c.enable_interaction, s);
  read(t, "enable_refind", c.enable_refind, s);
  read(t, "foreground_is_dark", c.entity.foreground_is_dark, s);
  if (t.contains("population_mode")) {
    std::string mode;
    read(t, "population_mode", mode, s);
    if (mode == "FIXED") c.population_mode = PopulationMode::kFixed;
    else if (mode == "OPEN") c.population_mode = PopulationMode::kOpen;
    else throw ConfigError("config: tracker.population_mode must be \"FIXED\" or \"OPEN\"");
  }
  if (t.contains("arena") && !t["arena"].is_null()) c.arena = read_box(t["arena"], "tracker.arena");
  if (t.contains("boundary_margin") && !t["boundary_margin"].is_null()) {
    double m = 0;
    read(t, "boundary_margin", m, s);
    c.boundary_margin = m;
  }
  if (t.contains("fixed_level") && !t["fixed_level"].is_null()) {
    int level = 0;
    read(t, "fixed_level", level, s);
    c.entity.fixed_level = level;
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void read_scenario(const json& j, ScenarioConfig& c) {
  const std::string s = "scenario";
  check_keys(j, s, {"n_agents", "n_frames", "arena", "body_w", "body_h", "speed", "turn_sigma",
                    "dropout_p", "jitter_sigma", "crossing_script", "crossing_offset", "crossing_angle", "oriented_bodies",
                    "seed"});
  read(j, "n_agents", c.n_agents, s);
  read(j, "n_frames", c.n_frames, s);
  read(j, "body_w", c.body_w, s);
  read(j, "body_h", c.body_h, s);
  read(j, "speed", c.speed, s);
  read(j, "turn_sigma", c.turn_sigma, s);
  read(j, "dropout_p", c.dropout_p, s);
  read(j, "jitter_sigma", c.jitter_sigma, s);
  read(j, "seed", c.seed, s);
  read(j, "oriented_bodies", c.oriented_bodies, s);
  read(j, "crossing_angle", c.crossing_angle, s);
  if (j.contains("arena")) c.arena = read_box(j["arena"], "scenario.arena");
  if (j.contains("crossing_offset") && !j["crossing_offset"].is_null()) {
    double o = 0;
    read(j, "crossing_offset", o, s);
    c.crossing_offset = o;
  }
  if (j.contains("crossing_script")) {
    const auto& script = j["crossing_script"];
    if (!script.is_array()) throw ConfigError("config: scenario.crossing_script must be an array");
    c.crossing_script.clear();
    for (const auto& e : script) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || !e[2].is_number_integer()) {
        throw ConfigError("config: crossing events must be [agent_a, agent_b, frame]");
      }
      c.crossing_script.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(root, "<root>", {"tracker", "scenario", "metrics"});
  AppConfig cfg;
  if (root.contains("tracker")) read_tracker(root["tracker"], cfg.tracker);
  if (root.contains("scenario")) read_scenario(root["scenario"], cfg.scenario);
  if (root.contains("metrics")) {
    check_keys(root["metrics"], "metrics", {"iou_gate"});
    read(root["metrics"], "iou_gate", cfg.iou_gate, "metrics");
    if (!(cfg.iou_gate >= 0.0 && cfg.iou_gate <= 1.0)) {
      throw ConfigError("config: metrics.iou_gate must be in [0,1]");
    }
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_file(path)); }

}  // namespace shoal
