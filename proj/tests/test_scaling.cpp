#include <doctest.h>

#include <random>

#include "beamprint/learn/scaling.hpp"

using namespace beamprint::learn;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(3.0, 7.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

}  // namespace

TEST_SUITE("scaling") {

TEST_CASE("min-max puts the training split in [0, 1]") {
  Matrix x = random_matrix(50, 6, 1);
  x.col(2).setConstant(4.0);
  const ScalingModel m = ScalingModel::fit(x);
  const Matrix s = m.apply(x);
  CHECK(s.minCoeff() >= 0.0);
  CHECK(s.maxCoeff() <= 1.0 + 1e-12);
  for (Eigen::Index j : {0, 1, 3, 4, 5}) {
    CHECK(s.col(j).minCoeff() == doctest::Approx(0.0));
    CHECK(s.col(j).maxCoeff() == doctest::Approx(1.0));
  }
  CHECK(s.col(2).isZero());
}

TEST_CASE("applying a stored model is affine and never refits") {
  const Matrix train = random_matrix(40, 5, 2);
  const Matrix other = random_matrix(30, 5, 3);
  for (ScalingKind kind : {ScalingKind::MinMax, ScalingKind::ZScore}) {
    const ScalingModel m = ScalingModel::fit(train, kind);
    const Matrix a = m.apply(other);
    for (Eigen::Index i = 0; i < other.rows(); ++i) {
      for (Eigen::Index j = 0; j < other.cols(); ++j) {
        CHECK(a(i, j) == doctest::Approx((other(i, j) - m.offset(j)) / m.scale(j)));
      }
    }
    // Differences scale by the stored range alone.
    const Matrix diff = m.apply(other.topRows(1)) - m.apply(other.bottomRows(1));
    for (Eigen::Index j = 0; j < other.cols(); ++j) {
      CHECK(diff(0, j) == doctest::Approx((other(0, j) - other(other.rows() - 1, j)) / m.scale(j)));
    }
  }
}

TEST_CASE("z-score gives zero mean and unit variance") {
  const Matrix x = random_matrix(200, 4, 4);
  const Matrix s = ScalingModel::fit(x, ScalingKind::ZScore).apply(x);
  for (Eigen::Index j = 0; j < 4; ++j) {
    CHECK(s.col(j).mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.col(j).squaredNorm() / 200.0 == doctest::Approx(1.0));
  }
}

TEST_CASE("dimension mismatch and empty input are errors") {
  const ScalingModel m = ScalingModel::fit(random_matrix(5, 3, 5));
  CHECK_THROWS(m.apply(random_matrix(5, 4, 6)));
  CHECK_THROWS(ScalingModel::fit(Matrix(0, 3)));
}

}
