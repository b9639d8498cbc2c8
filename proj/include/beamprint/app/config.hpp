#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "beamprint/beam_mgmt.hpp"
#include "beamprint/learn/fingerprint.hpp"
#include "beamprint/link.hpp"
#include "beamprint/paam.hpp"
#include "beamprint/scene.hpp"

namespace beamprint::app {

struct LearnSettings {
  learn::FingerprintOptions fingerprint;
  double test_fraction = 0.3;
  std::uint64_t seed = 7;
  int pca_components = 50;  // clipped to min(dim, rows)
  int kmeans_restarts = 10;
  int kmeans_max_iter = 300;
};

struct AppConfig {
  scene::SiteConfig site;
  scene::PopulationConfig population;
  int crossing_pedestrians = 242;
  paam::ArrayConfig array;
  paam::GobLayout gob;
  link::LinkBudgetConfig link;
  beam_mgmt::SimulationConfig simulation;
  LearnSettings learn;

  AppConfig();
  /// Crossing count as a fraction of the pedestrian count.
  double crossing_fraction() const;
  void validate() const;
};

/// Strict reader: unknown keys and wrong types are ConfigErrors naming the
/// dotted key path. Missing keys keep their defaults.
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const AppConfig& config);

/// Parses JSON with comments; syntax errors report line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);

/// Environment overrides: BEAMPRINT_SIMULATION__DURATION_S=12 sets
/// simulation.duration_s. Values are parsed as JSON, else taken as strings.
void apply_env_overrides(nlohmann::json& j, const std::map<std::string, std::string>& env,
                         const std::string& prefix = "BEAMPRINT_");
std::map<std::string, std::string> current_environment();

/// Defaults, then the file (if any), then the environment.
AppConfig load_config(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& env);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace beamprint::app
