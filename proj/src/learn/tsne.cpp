#include "beamprint/learn/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace beamprint::learn {

std::vector<double> conditional_affinities(const std::vector<double>& d, std::size_t self,
                                           double perplexity) {
  const std::size_t n = d.size();
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) d_min = std::min(d_min, d[j]);
  }
  const double target = std::log(perplexity);
  std::vector<double> p(n, 0.0);
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) continue;
      const double shifted = d[j] - d_min;
      p[j] = std::exp(-beta * shifted);
      sum += p[j];
      weighted += shifted * p[j];
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-10) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += p[j];
  for (double& v : p) v /= sum;
  p[self] = 0.0;
  return p;
}

TsneEmbedding tsne_embed(const Matrix& x, const TsneOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 4) throw std::invalid_argument("t-SNE needs at least four rows");
  if (!(options.perplexity > 0.0) ||
      !(options.perplexity < static_cast<double>(n - 1) / 3.0)) {
    throw std::invalid_argument("perplexity must be positive and below (rows - 1) / 3");
  }
  if (options.n_iter < 1) throw std::invalid_argument("n_iter must be at least 1");

  // Symmetrized input affinities.
  std::vector<double> p(n * n, 0.0);
  {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j)))
                     .squaredNorm();
      }
      const auto cond = conditional_affinities(row, i, options.perplexity);
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = cond[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double s = std::max((p[i * n + j] + p[j * n + i]) / (2.0 * static_cast<double>(n)),
                                  1e-12);
        p[i * n + j] = s;
        p[j * n + i] = s;
      }
      p[i * n + i] = 0.0;
    }
  }
  double p_sum = 0.0;
  double p_log_p = 0.0;
  for (double v : p) {
    if (v > 0.0) {
      p_sum += v;
      p_log_p += v * std::log(v);
    }
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  std::vector<double> y(2 * n);
  for (double& v : y) v = init(rng);
  std::vector<double> update(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);
  std::vector<double> grad(2 * n);
  std::vector<double> num(n * n);

  // KL(P || Q) = sum p log p - sum p log num + log(sum num) * sum p
  auto kl_of = [&](double sum_num) {
    double cross = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
      if (p[k] > 0.0) cross += p[k] * std::log(num[k]);
    }
    return p_log_p - cross + std::log(sum_num) * p_sum;
  };
  auto kernel = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num[i * n + i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[2 * i] - y[2 * j];
        const double dy = y[2 * i + 1] - y[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = q;
        num[j * n + i] = q;
        sum += 2.0 * q;
      }
    }
    return sum;
  };

  TsneEmbedding out;
  out.perplexity = options.perplexity;
  const int exag_iters = std::min(options.exaggeration_iters, options.n_iter);

  auto gradient = [&](double sum_num, double exag) {
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0;
      double gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = num[i * n + j];
        const double mult = (exag * p[i * n + j] - q / sum_num) * q;
        gx += mult * (y[2 * i] - y[2 * j]);
        gy += mult * (y[2 * i + 1] - y[2 * j + 1]);
      }
      grad[2 * i] = 4.0 * gx;
      grad[2 * i + 1] = 4.0 * gy;
    }
  };
  auto recenter = [&] {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  };
  auto step = [&](double momentum, double rate) {
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? gains[k] * 0.8 : gains[k] + 0.2;
      gains[k] = std::max(gains[k], 0.01);
      update[k] = momentum * update[k] - rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    recenter();
  };

  for (int it = 0; it < exag_iters; ++it) {
    gradient(kernel(), options.exaggeration);
    step(options.initial_momentum, options.learning_rate);
  }

  // Plain phase. Velocity built up under exaggerated attraction overshoots
  // once P drops back, so start from rest. A step that would raise KL is
  // retried from rest with a halved rate; small samples otherwise oscillate.
  std::fill(update.begin(), update.end(), 0.0);
  std::fill(gains.begin(), gains.end(), 1.0);
  double sum_num = kernel();
  double kl = kl_of(sum_num);
  out.kl_history.push_back(kl);
  std::vector<double> y_prev(2 * n);
  std::vector<double> num_prev(n * n);
  for (int it = exag_iters; it < options.n_iter; ++it) {
    gradient(sum_num, 1.0);
    y_prev = y;
    num_prev.swap(num);
    double rate = options.learning_rate;
    double momentum = options.final_momentum;
    bool accepted = false;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      step(momentum, rate);
      const double cand_sum = kernel();
      const double cand_kl = kl_of(cand_sum);
      if (cand_kl <= kl) {
        sum_num = cand_sum;
        kl = cand_kl;
        accepted = true;
      } else {
        y = y_prev;
        std::fill(update.begin(), update.end(), 0.0);
        std::fill(gains.begin(), gains.end(), 1.0);
        momentum = 0.0;
        rate *= 0.5;
      }
    }
    if (!accepted) num.swap(num_prev);  // stationary: keep the previous kernel
    out.kl_history.push_back(kl);
  }

  out.final_kl = kl;
  out.kl_after_exaggeration = out.kl_history.front();
  out.points.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.points(static_cast<Eigen::Index>(i), 0) = y[2 * i];
    out.points(static_cast<Eigen::Index>(i), 1) = y[2 * i + 1];
  }
  return out;
}

}  // namespace beamprint::learn
