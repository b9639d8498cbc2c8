#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamprint/app/config.hpp"
#include "beamprint/app/recipes.hpp"
#include "beamprint/beam_mgmt.hpp"

namespace beamprint::app {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Installs a stderr logger; `verbose` lowers the level to debug.
void init_logging(bool verbose = false);

/// A simulated dataset directory: reports.csv, manifest.jsonl, run_meta.json.
struct Dataset {
  std::filesystem::path dir;
  std::vector<beam_mgmt::MeasurementReport> reports;
  std::vector<scene::UeTrack> manifest;
  AppConfig config;  // the configuration that produced it
};

/// DataError when files are missing or malformed.
Dataset load_dataset(const std::filesystem::path& dir);

/// UE ids per split; every label contributes round(test_fraction * n) UEs to
/// the test side, at least one and never all when it has two or more.
struct UeSplit {
  std::set<int> train;
  std::set<int> test;
};
UeSplit split_by_ue(const std::map<int, int>& ue_label, double test_fraction, std::uint64_t seed);

/// Writes one dataset per configured seed (seed_<n>/ subdirectories when
/// there are several). A recipe, when given, replaces the population counts.
Json cmd_simulate(const AppConfig& config, const std::filesystem::path& out_dir,
                  const ExperimentRecipe* recipe = nullptr, bool write_jsonl = false);

/// Fingerprints, scaling, PCA and K-means fitted on the training UEs; purity
/// is reported on both splits.
Json cmd_cluster(const AppConfig& config, const std::filesystem::path& dataset,
                 const ExperimentRecipe& recipe, const std::filesystem::path& out_dir);

Json cmd_embed(const AppConfig& config, const std::filesystem::path& dataset,
               const ExperimentRecipe& recipe, const std::filesystem::path& out_dir);

Json cmd_train(const AppConfig& config, const std::filesystem::path& dataset,
               const ExperimentRecipe& recipe, const std::filesystem::path& out_dir);

enum class EvalSplit { All, Train, Test };
EvalSplit eval_split_from_string(const std::string& s);

Json cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& dataset,
              EvalSplit split, const std::filesystem::path& out_dir);

std::string recipes_listing();

/// Pretty JSON with a trailing newline, as written to every metrics file.
std::string dump_json(const Json& j);

}  // namespace beamprint::app
