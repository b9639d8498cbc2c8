#include "beamprint/learn/kmeans.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace beamprint::learn {

namespace {

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Returns inertia; fills labels and each row's squared distance.
double assign_all(const Matrix& x, const Matrix& c, Labels& labels, std::vector<double>& dist) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = sq_dist(x, i, c, 0);
    for (Eigen::Index j = 1; j < c.rows(); ++j) {
      const double d = sq_dist(x, i, c, j);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = best_d;
    inertia += best_d;
  }
  return inertia;
}

Matrix plus_plus_init(const Matrix& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix c(k, x.cols());
  auto pick_uniform = [&] {
    return std::min<Eigen::Index>(static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n)),
                                  n - 1);
  };
  c.row(0) = x.row(pick_uniform());
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(x, i, c, 0);
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (double d : d2) total += d;
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick_uniform();
    }
    c.row(j) = x.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(x, i, c, j));
    }
  }
  return c;
}

KMeansModel lloyd(const Matrix& x, Matrix centroids, int max_iter) {
  const Eigen::Index n = x.rows();
  const int k = static_cast<int>(centroids.rows());
  Labels labels(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));

  KMeansModel m;
  m.inertia = assign_all(x, centroids, labels, dist);
  m.inertia_history.push_back(m.inertia);

  int iter = 0;
  while (iter < max_iter) {
    ++iter;
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        centroids.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
        continue;
      }
      // Empty cluster: move it onto the worst-served point.
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) far = i;
      }
      centroids.row(j) = x.row(far);
      labels[static_cast<std::size_t>(far)] = j;
      dist[static_cast<std::size_t>(far)] = 0.0;
    }

    const Labels previous = labels;
    m.inertia = assign_all(x, centroids, labels, dist);
    m.inertia_history.push_back(m.inertia);
    if (labels == previous) break;
  }
  m.centroids = std::move(centroids);
  m.n_iter = iter;
  return m;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& x, const KMeansOptions& options) {
  if (options.k < 1) throw std::invalid_argument("k must be at least 1");
  if (options.k > x.rows()) throw std::invalid_argument("k exceeds the number of rows");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (options.n_restarts < 1) throw std::invalid_argument("n_restarts must be at least 1");

  std::mt19937_64 rng(options.seed);
  KMeansModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.n_restarts; ++r) {
    KMeansModel m = lloyd(x, plus_plus_init(x, options.k, rng), options.max_iter);
    if (m.inertia < best.inertia) best = std::move(m);
  }
  return best;
}

Labels kmeans_assign(const KMeansModel& model, const Matrix& x) {
  if (x.cols() != model.centroids.cols()) {
    throw std::invalid_argument("K-means model dimension mismatch");
  }
  Labels labels(static_cast<std::size_t>(x.rows()));
  std::vector<double> dist(static_cast<std::size_t>(x.rows()));
  assign_all(x, model.centroids, labels, dist);
  return labels;
}

double kmeans_inertia(const KMeansModel& model, const Matrix& x) {
  Labels labels(static_cast<std::size_t>(x.rows()));
  std::vector<double> dist(static_cast<std::size_t>(x.rows()));
  return assign_all(x, model.centroids, labels, dist);
}

ElbowResult elbow_select(const Matrix& x, int k_min, int k_max, const KMeansOptions& base,
                         double min_knee_strength) {
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("invalid k range");
  if (k_max > x.rows()) throw std::invalid_argument("k_max exceeds the number of rows");

  ElbowResult r;
  r.k_min = k_min;
  r.k = k_min;
  for (int k = k_min; k <= k_max; ++k) {
    KMeansOptions o = base;
    o.k = k;
    r.inertia.push_back(kmeans_fit(x, o).inertia);
  }
  if (r.inertia.size() < 3) return r;

  const double drop = r.inertia.front() - r.inertia.back();
  double best = -std::numeric_limits<double>::infinity();
  int knee = k_min;
  for (std::size_t i = 1; i + 1 < r.inertia.size(); ++i) {
    const double second = r.inertia[i - 1] - 2.0 * r.inertia[i] + r.inertia[i + 1];
    if (second > best) {
      best = second;
      knee = k_min + static_cast<int>(i);
    }
  }
  r.knee_strength = drop > 0.0 ? best / drop : 0.0;
  if (!(drop > 0.0) || r.knee_strength < min_knee_strength) {
    r.degenerate = true;
    return r;
  }
  r.k = knee;
  return r;
}

}  // namespace beamprint::learn
