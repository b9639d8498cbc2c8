#include <doctest.h>

#include <random>

#include "beamprint/learn/metrics.hpp"
#include "oracles.hpp"

using namespace beamprint::learn;

TEST_SUITE("metrics") {

TEST_CASE("misclassification rate") {
  CHECK(misclassification_rate({0, 1, 2}, {0, 1, 2}) == 0.0);
  CHECK(misclassification_rate({1, 0}, {0, 1}) == 1.0);
  CHECK(misclassification_rate({0, 1, 1, 0}, {0, 1, 0, 0}) == 0.25);
  CHECK_THROWS(misclassification_rate({0}, {0, 1}));
  CHECK_THROWS(misclassification_rate({}, {}));
}

TEST_CASE("purity on simple layouts") {
  CHECK(cluster_purity({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(cluster_purity({0, 0, 0, 0}, {0, 1, 0, 1}) == 0.5);
}

TEST_CASE("purity of 90/10 mixtures by hand") {
  // Cluster 0: 90 of class 0, 10 of class 1. Cluster 1: 9 of class 2, 1 of
  // class 0. Cluster 2: 45 of class 1, 5 of class 2.
  Labels c, t;
  auto add = [&](int cluster, int cls, int n) {
    for (int i = 0; i < n; ++i) {
      c.push_back(cluster);
      t.push_back(cls);
    }
  };
  add(0, 0, 90);
  add(0, 1, 10);
  add(1, 2, 9);
  add(1, 0, 1);
  add(2, 1, 45);
  add(2, 2, 5);
  CHECK(cluster_purity(c, t) == doctest::Approx((90.0 + 9.0 + 45.0) / 160.0));
}

TEST_CASE("purity matches direct counting on random labels") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cl(0, 4), tr(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Labels c(200), t(200);
    for (int i = 0; i < 200; ++i) {
      c[i] = cl(rng);
      t[i] = tr(rng);
    }
    CHECK(cluster_purity(c, t) == doctest::Approx(oracle::purity(c, t)));
  }
}

TEST_CASE("confusion matrix counts true by predicted") {
  const auto m = confusion_matrix({0, 1, 1, 2}, {0, 0, 1, 2}, 3);
  CHECK(m == std::vector<std::vector<int>>{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK_THROWS(confusion_matrix({0, 3}, {0, 1}, 3));
}

}
