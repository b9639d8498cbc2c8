#pragma once

#include <cstdint>
#include <vector>

#include "beamprint/learn/matrix.hpp"

namespace beamprint::learn {

struct KMeansOptions {
  int k = 2;
  std::uint64_t seed = 0;
  int max_iter = 300;
  int n_restarts = 10;
};

struct KMeansModel {
  Matrix centroids;  // k x dim
  double inertia = 0.0;
  int n_iter = 0;
  /// Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;

  int k() const { return static_cast<int>(centroids.rows()); }
};

/// Lloyd iterations from k-means++ seeding; the lowest-inertia restart wins
/// (earlier restart on ties). A cluster that empties is re-seeded at the
/// point farthest from its current centroid.
KMeansModel kmeans_fit(const Matrix& x, const KMeansOptions& options);

/// Nearest centroid per row, ties to the lowest centroid index.
Labels kmeans_assign(const KMeansModel& model, const Matrix& x);

/// Sum of squared distances of rows to their nearest centroid.
double kmeans_inertia(const KMeansModel& model, const Matrix& x);

struct ElbowResult {
  int k = 1;
  int k_min = 1;
  std::vector<double> inertia;  // index i holds k_min + i
  double knee_strength = 0.0;   // best second difference / total inertia drop
  bool degenerate = false;      // no pronounced knee; k = k_min
};

/// Fits K-means for every k in [k_min, k_max] and returns the argmax of the
/// discrete second difference of inertia over the interior of the range. A
/// curve whose best bend is below `min_knee_strength` of the total drop is
/// treated as flat.
ElbowResult elbow_select(const Matrix& x, int k_min, int k_max, const KMeansOptions& base,
                         double min_knee_strength = 0.5);

}  // namespace beamprint::learn
