#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "beamprint/learn/tsne.hpp"

using namespace beamprint::learn;

namespace {

Matrix two_blobs(int per, int dim, double gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(2 * per, dim);
  for (int i = 0; i < 2 * per; ++i)
    for (int j = 0; j < dim; ++j) x(i, j) = n(rng) + (i >= per && j == 0 ? gap : 0.0);
  return x;
}

double dist(const Matrix& y, Eigen::Index a, Eigen::Index b) { return (y.row(a) - y.row(b)).norm(); }

}  // namespace

TEST_SUITE("tsne") {

TEST_CASE("bandwidth search hits the target perplexity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (double perp : {5.0, 15.0, 30.0}) {
    std::vector<double> row(120);
    for (double& v : row) v = u(rng);
    row[7] = 0.0;
    const auto p = conditional_affinities(row, 7, perp);
    double sum = 0.0, h = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      sum += p[j];
      if (p[j] > 0) h -= p[j] * std::log(p[j]);
    }
    CHECK(p[7] == 0.0);
    CHECK(sum == doctest::Approx(1.0));
    CHECK(std::exp(h) == doctest::Approx(perp).epsilon(1e-6));
  }
}

TEST_CASE("two far blobs embed into disjoint groups") {
  const Matrix x = two_blobs(50, 8, 40.0, 2);
  TsneOptions o;
  o.perplexity = 15.0;
  o.seed = 3;
  o.n_iter = 600;
  const TsneEmbedding e = tsne_embed(x, o);
  REQUIRE(e.points.rows() == 100);
  double max_intra = 0.0, min_inter = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < 100; ++i) {
    for (Eigen::Index j = i + 1; j < 100; ++j) {
      const bool same = (i < 50) == (j < 50);
      const double d = dist(e.points, i, j);
      if (same) max_intra = std::max(max_intra, d);
      else min_inter = std::min(min_inter, d);
    }
  }
  CHECK(min_inter > max_intra);
}

TEST_CASE("KL does not rise after exaggeration") {
  for (std::uint64_t seed : {1, 2}) {
    const Matrix x = two_blobs(40, 6, 3.0, 10 + seed);
    TsneOptions o;
    o.perplexity = 10.0;
    o.seed = seed;
    o.n_iter = 500;
    const TsneEmbedding e = tsne_embed(x, o);
    REQUIRE(e.kl_history.size() >= 2);
    CHECK(e.kl_after_exaggeration == e.kl_history.front());
    for (std::size_t i = 1; i < e.kl_history.size(); ++i) {
      CHECK(e.kl_history[i] <= e.kl_history[i - 1] + 1e-3);
    }
    CHECK(e.final_kl <= e.kl_after_exaggeration);
    CHECK(e.final_kl >= 0.0);
  }
}

TEST_CASE("duplicate points land together") {
  // A duplicate pair settles where q_01 meets p_01. On very small samples
  // 1/Z exceeds p_01 and the pair stays visibly apart, so use default
  // perplexity on a few hundred rows.
  for (std::uint64_t seed : {0, 1}) {
    Matrix x = two_blobs(100, 5, 6.0, 4 + seed);
    x.row(1) = x.row(0);
    TsneOptions o;
    o.seed = seed;
    const TsneEmbedding e = tsne_embed(x, o);
    double diameter = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = i + 1; j < x.rows(); ++j) diameter = std::max(diameter, dist(e.points, i, j));
    CHECK(dist(e.points, 0, 1) < 0.01 * diameter);
  }
}

TEST_CASE("same seed, same embedding") {
  const Matrix x = two_blobs(20, 4, 5.0, 5);
  TsneOptions o;
  o.perplexity = 5.0;
  o.n_iter = 300;
  CHECK(tsne_embed(x, o).points == tsne_embed(x, o).points);
}

TEST_CASE("perplexity must fit the sample") {
  const Matrix x = two_blobs(5, 3, 1.0, 6);
  TsneOptions o;
  o.perplexity = 30.0;
  CHECK_THROWS(tsne_embed(x, o));
  CHECK_THROWS(tsne_embed(x.topRows(3), TsneOptions{2.0}));
}

}
