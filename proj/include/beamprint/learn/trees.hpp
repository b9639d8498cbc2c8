#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamprint/learn/matrix.hpp"

namespace beamprint::learn {

enum class EnsembleKind { ExtraTrees, AdaBoost };

/// Classification fits class votes; LabelRegression regresses the integer
/// label code and rounds the aggregate back to the nearest valid class.
enum class TargetMode { Classification, LabelRegression };

std::string to_string(EnsembleKind k);
std::string to_string(TargetMode m);
EnsembleKind ensemble_kind_from_string(const std::string& s);
TargetMode target_mode_from_string(const std::string& s);

/// Flat binary tree. A node with feature < 0 is a leaf whose value block
/// starts at `value_offset` in `values`: class proportions (n_outputs =
/// n_classes) or a single regression value (n_outputs = 1). Internal nodes
/// send x[feature] <= threshold to `left`.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int value_offset = -1;
  };
  std::vector<Node> nodes;
  std::vector<double> values;
  int n_outputs = 1;

  const double* leaf_values(const double* row) const;
  /// Argmax of the leaf block, ties to the lowest class.
  int predict_class(const double* row) const;
  double predict_value(const double* row) const { return leaf_values(row)[0]; }
  int depth() const;
};

struct TreeEnsemble {
  EnsembleKind kind = EnsembleKind::ExtraTrees;
  TargetMode target = TargetMode::Classification;
  int n_classes = 0;
  int n_features = 0;
  std::vector<DecisionTree> trees;
  std::vector<double> boost_weights;  // AdaBoost only, one per tree
  int prior_class = 0;                // used when no tree was kept

  Labels predict(const Matrix& x) const;
};

struct ExtraTreesOptions {
  int n_trees = 100;
  int max_depth = 0;  // 0 = grow until pure or constant
  int min_samples_split = 2;
  int max_features = 0;  // 0 = round(sqrt(dim))
  std::uint64_t seed = 0;
  TargetMode target = TargetMode::Classification;
  int n_threads = 0;  // 0 = hardware concurrency; results do not depend on it
};

struct AdaBoostOptions {
  int n_rounds = 100;
  int max_depth = 3;
  double learning_rate = 1.0;
  std::uint64_t seed = 0;  // orders the feature scan, which settles equal-gain ties
  TargetMode target = TargetMode::Classification;
};

/// `n_classes` = 0 infers max(y) + 1.
TreeEnsemble extra_trees_fit(const Matrix& x, const Labels& y, const ExtraTreesOptions& options,
                             int n_classes = 0);

/// SAMME boosting of weighted best-split trees (Classification) or AdaBoost.R2
/// with a weighted-median aggregate (LabelRegression).
TreeEnsemble adaboost_fit(const Matrix& x, const Labels& y, const AdaBoostOptions& options,
                          int n_classes = 0);

}  // namespace beamprint::learn
