#include <doctest.h>

#include <random>

#include "beamprint/learn/metrics.hpp"
#include "beamprint/learn/trees.hpp"

using namespace beamprint::learn;

namespace {

struct Data {
  Matrix x;
  Labels y;
};

// Class is decided by feature 0 against a threshold; other features are noise.
Data threshold_split(int n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Data d{Matrix(n, dim), Labels(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) d.x(i, j) = u(rng);
    d.y[static_cast<std::size_t>(i)] = d.x(i, 0) > 0.3 ? 1 : 0;
  }
  return d;
}

// Three overlapping Gaussian classes.
Data gaussian_classes(int per, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  Data d{Matrix(3 * per, 4), Labels(static_cast<std::size_t>(3 * per))};
  for (int i = 0; i < 3 * per; ++i) {
    const int c = i / per;
    for (int j = 0; j < 4; ++j) d.x(i, j) = n(rng) + (j == c ? 2.5 : 0.0);
    d.y[static_cast<std::size_t>(i)] = c;
  }
  return d;
}

void check_structure(const TreeEnsemble& e) {
  for (const DecisionTree& t : e.trees) {
    REQUIRE(!t.nodes.empty());
    for (const auto& node : t.nodes) {
      if (node.feature >= 0) {
        CHECK(node.feature < e.n_features);
        CHECK(node.left > 0);
        CHECK(node.right > 0);
        CHECK(static_cast<std::size_t>(node.left) < t.nodes.size());
        CHECK(static_cast<std::size_t>(node.right) < t.nodes.size());
      } else {
        CHECK(node.value_offset >= 0);
        CHECK(static_cast<std::size_t>(node.value_offset + t.n_outputs) <= t.values.size());
      }
    }
  }
}

}  // namespace

TEST_SUITE("trees") {

TEST_CASE("single-class data predicts that class") {
  Data d = threshold_split(40, 3, 1);
  std::fill(d.y.begin(), d.y.end(), 2);
  const TreeEnsemble et = extra_trees_fit(d.x, d.y, {.n_trees = 5}, 3);
  const TreeEnsemble ab = adaboost_fit(d.x, d.y, {.n_rounds = 5}, 3);
  for (const TreeEnsemble* e : {&et, &ab}) {
    for (int p : e->predict(d.x)) CHECK(p == 2);
  }
}

TEST_CASE("a single threshold is learned exactly") {
  const Data d = threshold_split(300, 5, 2);
  const TreeEnsemble et = extra_trees_fit(d.x, d.y, {.n_trees = 10, .seed = 3});
  CHECK(misclassification_rate(et.predict(d.x), d.y) == 0.0);
  check_structure(et);
  const TreeEnsemble ab = adaboost_fit(d.x, d.y, {.n_rounds = 5, .seed = 3});
  CHECK(ab.trees.size() <= 5);
  CHECK(misclassification_rate(ab.predict(d.x), d.y) == 0.0);
  check_structure(ab);
}

TEST_CASE("fully grown extra trees fit distinct rows exactly") {
  const Data d = gaussian_classes(60, 4);
  for (TargetMode mode : {TargetMode::Classification, TargetMode::LabelRegression}) {
    const TreeEnsemble et = extra_trees_fit(d.x, d.y, {.n_trees = 15, .seed = 5, .target = mode});
    CHECK(misclassification_rate(et.predict(d.x), d.y) == 0.0);
  }
}

TEST_CASE("fits are deterministic for a seed and independent of thread count") {
  const Data d = gaussian_classes(50, 6);
  const auto a = extra_trees_fit(d.x, d.y, {.n_trees = 12, .seed = 7, .n_threads = 1});
  const auto b = extra_trees_fit(d.x, d.y, {.n_trees = 12, .seed = 7, .n_threads = 4});
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    CHECK(a.trees[t].values == b.trees[t].values);
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      CHECK(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
      CHECK(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
    }
  }
  const auto c = adaboost_fit(d.x, d.y, {.n_rounds = 20, .seed = 7});
  const auto e = adaboost_fit(d.x, d.y, {.n_rounds = 20, .seed = 7});
  CHECK(c.boost_weights == e.boost_weights);
  CHECK(c.predict(d.x) == e.predict(d.x));
  const auto f = extra_trees_fit(d.x, d.y, {.n_trees = 12, .seed = 8});
  CHECK(f.trees[0].values != a.trees[0].values);
}

TEST_CASE("depth limits hold") {
  const Data d = gaussian_classes(60, 8);
  for (const auto& t : extra_trees_fit(d.x, d.y, {.n_trees = 6, .max_depth = 3}).trees) CHECK(t.depth() <= 3);
  for (const auto& t : adaboost_fit(d.x, d.y, {.n_rounds = 6, .max_depth = 2}).trees) CHECK(t.depth() <= 2);
}

TEST_CASE("boosting generalizes on overlapping classes") {
  const Data train = gaussian_classes(200, 9);
  const Data test = gaussian_classes(200, 10);
  for (TargetMode mode : {TargetMode::Classification, TargetMode::LabelRegression}) {
    const auto ab = adaboost_fit(train.x, train.y, {.n_rounds = 40, .seed = 1, .target = mode});
    REQUIRE(!ab.trees.empty());
    for (double w : ab.boost_weights) CHECK(w > 0.0);
    // Chance is 2/3 error; the Bayes error here is about 0.1.
    CHECK(misclassification_rate(ab.predict(test.x), test.y) < 0.25);
    for (int p : ab.predict(test.x)) {
      CHECK(p >= 0);
      CHECK(p < 3);
    }
  }
  const auto et = extra_trees_fit(train.x, train.y, {.n_trees = 50, .seed = 1});
  CHECK(misclassification_rate(et.predict(test.x), test.y) < 0.25);
}

TEST_CASE("vote ties go to the lowest class") {
  TreeEnsemble e;
  e.n_classes = 3;
  e.n_features = 1;
  for (int cls : {2, 1}) {
    DecisionTree t;
    t.n_outputs = 3;
    t.nodes.push_back({-1, 0.0, -1, -1, 0});
    t.values = {0.0, 0.0, 0.0};
    t.values[static_cast<std::size_t>(cls)] = 1.0;
    e.trees.push_back(t);
  }
  CHECK(e.predict(Matrix::Zero(1, 1)) == Labels{1});
  DecisionTree flat;
  flat.n_outputs = 3;
  flat.nodes.push_back({-1, 0.0, -1, -1, 0});
  flat.values = {0.25, 0.5, 0.5};
  const double row = 0.0;
  CHECK(flat.predict_class(&row) == 1);
}

TEST_CASE("bad training input is rejected") {
  Data d = threshold_split(10, 2, 11);
  CHECK_THROWS(extra_trees_fit(Matrix(0, 2), {}, {}));
  CHECK_THROWS(extra_trees_fit(d.x, Labels(9, 0), {}));
  Labels neg = d.y;
  neg[0] = -1;
  CHECK_THROWS(adaboost_fit(d.x, neg, {}));
  CHECK_THROWS(extra_trees_fit(d.x, d.y, {}, 1));
  Matrix nan = d.x;
  nan(3, 1) = std::nan("");
  CHECK_THROWS(extra_trees_fit(nan, d.y, {}));
  const auto e = extra_trees_fit(d.x, d.y, {.n_trees = 2});
  CHECK_THROWS(e.predict(Matrix::Zero(2, 3)));
}

TEST_CASE("kind and mode names round trip") {
  CHECK(ensemble_kind_from_string(to_string(EnsembleKind::AdaBoost)) == EnsembleKind::AdaBoost);
  CHECK(target_mode_from_string(to_string(TargetMode::LabelRegression)) == TargetMode::LabelRegression);
  CHECK_THROWS(ensemble_kind_from_string("forest"));
}

}
