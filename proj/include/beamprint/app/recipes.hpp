#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beamprint/learn/fingerprint.hpp"
#include "beamprint/learn/trees.hpp"
#include "beamprint/scene.hpp"

namespace beamprint::app {

enum class Grouping { FiveClass, FastSlow, PedBike, CrossNoncross, ClassSubset };
enum class Method { Kmeans, Tsne, ExtraTrees, AdaBoost };

std::string to_string(Grouping g);
std::string to_string(Method m);

/// One output label and the UE classes it collects. Member tokens: ped,
/// ped-nc, ped-cr, bike, car, bus, mc.
struct LabelGroup {
  std::string name;
  std::vector<std::string> members;
};

bool token_matches(const std::string& token, const scene::UeClass& cls);
/// Throws std::invalid_argument for an unknown token.
void check_token(const std::string& token);

struct ExperimentRecipe {
  std::string name;
  std::string description;
  Grouping grouping = Grouping::FiveClass;
  std::vector<LabelGroup> labels;
  Method method = Method::Kmeans;

  // Population the recipe was written for; `simulate --recipe` uses it.
  std::map<scene::MainClass, int> population;
  int crossing_count = 0;

  // K-means: k = 0 takes the elbow knee.
  int k = 2;
  bool elbow = false;
  int k_min = 1;
  int k_max = 10;

  // t-SNE
  double perplexity = 30.0;
  int n_iter = 1000;
  int max_rows = 1000;

  // Supervised; pca_components = 0 feeds scaled fingerprints directly.
  learn::ExtraTreesOptions extra_trees;
  learn::AdaBoostOptions adaboost;
  int pca_components = 0;

  std::optional<learn::FingerprintOptions> fingerprint;  // else the config's
  std::optional<double> reference_rate;  // published figure, as a fraction
  std::optional<double> max_rate;        // acceptance ceiling
  std::vector<std::uint64_t> seeds;      // empty: the config's learn.seed

  /// Label index of a UE class, or nothing when the recipe ignores it.
  std::optional<int> label_of(const scene::UeClass& cls) const;
  std::vector<std::string> class_names() const;
};

const std::vector<ExperimentRecipe>& builtin_recipes();
/// ConfigError for an unknown name.
const ExperimentRecipe& find_recipe(const std::string& name);

}  // namespace beamprint::app
