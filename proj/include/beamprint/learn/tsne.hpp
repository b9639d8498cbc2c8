#pragma once

#include <cstdint>
#include <vector>

#include "beamprint/learn/matrix.hpp"

namespace beamprint::learn {

struct TsneOptions {
  double perplexity = 30.0;
  std::uint64_t seed = 0;
  int n_iter = 1000;
  int exaggeration_iters = 250;
  double exaggeration = 12.0;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
};

struct TsneEmbedding {
  Matrix points;  // n x 2
  double perplexity = 0.0;
  double final_kl = 0.0;
  double kl_after_exaggeration = 0.0;
  /// KL divergence at every iteration after the exaggeration phase.
  std::vector<double> kl_history;
};

/// Exact (O(n^2)) t-SNE with per-point bandwidth bisection, symmetrized
/// affinities, Student-t output kernel, early exaggeration, momentum and
/// per-coordinate adaptive gains. After exaggeration a step that would raise
/// KL is retried from rest at half the rate, so the recorded KL never rises.
TsneEmbedding tsne_embed(const Matrix& x, const TsneOptions& options);

/// Conditional affinities P(j|i) for one row of squared distances solved to
/// the target perplexity; exposed for tests.
std::vector<double> conditional_affinities(const std::vector<double>& sq_dist_row,
                                           std::size_t self, double perplexity);

}  // namespace beamprint::learn
