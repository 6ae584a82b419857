#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "shoal/simulator.hpp"
#include "shoal/tracker.hpp"

namespace shoal {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a JSON config file can set. Sections and keys mirror the field
/// names of TrackerConfig and ScenarioConfig:
///
///   { "tracker":  { "tau_match": 0.3, "population_mode": "FIXED", ... },
///     "scenario": { "n_agents": 10, "crossing_script": [[0, 1, 40]], ... },
///     "metrics":  { "iou_gate": 0.5 } }
///
/// Unknown sections or keys are rejected.
struct AppConfig {
  TrackerConfig tracker;
  ScenarioConfig scenario;
  double iou_gate = 0.5;
};

AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace shoal
