#include "beamprint/learn/trees.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "beamprint/rng.hpp"

namespace beamprint::learn {

std::string to_string(EnsembleKind k) {
  return k == EnsembleKind::ExtraTrees ? "extra_trees" : "adaboost";
}

std::string to_string(TargetMode m) {
  return m == TargetMode::Classification ? "classification" : "label_regression";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
  if (s == "extra_trees") return EnsembleKind::ExtraTrees;
  if (s == "adaboost") return EnsembleKind::AdaBoost;
  throw std::invalid_argument("unknown ensemble kind '" + s + "'");
}

TargetMode target_mode_from_string(const std::string& s) {
  if (s == "classification") return TargetMode::Classification;
  if (s == "label_regression") return TargetMode::LabelRegression;
  throw std::invalid_argument("unknown target mode '" + s + "'");
}

const double* DecisionTree::leaf_values(const double* row) const {
  int n = 0;
  while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
    const Node& node = nodes[static_cast<std::size_t>(n)];
    n = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return values.data() + nodes[static_cast<std::size_t>(n)].value_offset;
}

int DecisionTree::predict_class(const double* row) const {
  const double* v = leaf_values(row);
  return static_cast<int>(std::max_element(v, v + n_outputs) - v);
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  while (!stack.empty()) {
    const auto [n, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const Node& node = nodes[static_cast<std::size_t>(n)];
    if (node.feature >= 0) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

namespace {

int round_to_class(double v, int n_classes) {
  const double r = std::nearbyint(v);
  return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(n_classes - 1)));
}

int validate_training(const Matrix& x, const Labels& y, int n_classes) {
  if (x.rows() == 0) throw std::invalid_argument("empty training set");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("feature rows and labels differ in length");
  }
  if (x.cols() == 0) throw std::invalid_argument("training set has no features");
  if (!x.allFinite()) throw std::invalid_argument("training features must be finite");
  const int max_label = *std::max_element(y.begin(), y.end());
  if (*std::min_element(y.begin(), y.end()) < 0) throw std::invalid_argument("negative label");
  if (n_classes == 0) n_classes = max_label + 1;
  if (max_label >= n_classes) throw std::invalid_argument("label outside [0, n_classes)");
  return n_classes;
}

int majority_label(const Labels& y, int n_classes) {
  std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v)];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Node statistics shared by both criteria. For one-hot class targets `s`
// holds per-class weight; for label regression s[0] is the weighted label
// sum. Gini and squared error both reduce to sq - sum(s^2)/w.
struct Stats {
  double w = 0.0;
  double sq = 0.0;
  int count = 0;
  std::vector<double> s;

  explicit Stats(int outputs = 1) : s(static_cast<std::size_t>(outputs), 0.0) {}
  double score() const {
    double acc = 0.0;
    for (double v : s) acc += v * v;
    return w > 0.0 ? acc / w : 0.0;
  }
  double impurity() const { return sq - score(); }
};

struct Targets {
  const Labels& y;
  bool regression;
  int outputs;

  void add(Stats& st, int i, double w) const {
    const int label = y[static_cast<std::size_t>(i)];
    st.w += w;
    ++st.count;
    if (regression) {
      st.s[0] += w * label;
      st.sq += w * label * label;
    } else {
      st.s[static_cast<std::size_t>(label)] += w;
      st.sq += w;
    }
  }
};

void store_leaf(DecisionTree& tree, int node, const Stats& st) {
  auto& n = tree.nodes[static_cast<std::size_t>(node)];
  n.feature = -1;
  n.value_offset = static_cast<int>(tree.values.size());
  for (double v : st.s) tree.values.push_back(st.w > 0.0 ? v / st.w : 0.0);
}

bool is_pure(const Stats& st) { return st.impurity() <= 1e-12 * std::max(st.w, 1e-300); }

DecisionTree build_extra_tree(const Matrix& x, const Targets& targets,
                              const ExtraTreesOptions& o, int k_features, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n_features = static_cast<int>(x.cols());
  std::vector<int> features(static_cast<std::size_t>(n_features));
  std::iota(features.begin(), features.end(), 0);
  std::vector<int> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);

  DecisionTree tree;
  tree.n_outputs = targets.outputs;
  tree.nodes.emplace_back();
  struct Work {
    int node, begin, end, depth;
  };
  std::vector<Work> stack = {{0, 0, static_cast<int>(idx.size()), 0}};
  Stats left(targets.outputs);
  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    Stats st(targets.outputs);
    for (int k = w.begin; k < w.end; ++k) targets.add(st, idx[static_cast<std::size_t>(k)], 1.0);

    const bool stop = st.count < o.min_samples_split || (o.max_depth > 0 && w.depth >= o.max_depth) ||
                      is_pure(st);
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = -1.0;
    for (int j = 0, evaluated = 0; !stop && j < n_features && evaluated < k_features; ++j) {
      std::uniform_int_distribution<int> pick(j, n_features - 1);
      std::swap(features[static_cast<std::size_t>(j)],
                features[static_cast<std::size_t>(pick(rng))]);
      const int f = features[static_cast<std::size_t>(j)];
      double lo = x(idx[static_cast<std::size_t>(w.begin)], f);
      double hi = lo;
      for (int k = w.begin + 1; k < w.end; ++k) {
        const double v = x(idx[static_cast<std::size_t>(k)], f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      ++evaluated;
      double thr = lo + unit(rng) * (hi - lo);
      if (thr >= hi) thr = lo;

      left = Stats(targets.outputs);
      for (int k = w.begin; k < w.end; ++k) {
        const int i = idx[static_cast<std::size_t>(k)];
        if (x(i, f) <= thr) targets.add(left, i, 1.0);
      }
      Stats right(targets.outputs);
      right.w = st.w - left.w;
      for (std::size_t c = 0; c < st.s.size(); ++c) right.s[c] = st.s[c] - left.s[c];
      const double score = left.score() + right.score();
      if (score > best_score) {
        best_score = score;
        best_feature = f;
        best_threshold = thr;
      }
    }

    if (best_feature < 0) {
      store_leaf(tree, w.node, st);
      continue;
    }
    auto mid = std::partition(idx.begin() + w.begin, idx.begin() + w.end,
                              [&](int i) { return x(i, best_feature) <= best_threshold; });
    const int split = static_cast<int>(mid - idx.begin());
    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(w.node)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = l + 1;
    stack.push_back({l + 1, split, w.end, w.depth + 1});
    stack.push_back({l, w.begin, split, w.depth + 1});
  }
  return tree;
}

// Level-wise best-split growth over feature orders sorted once per fit, so
// each boosting round costs O(depth * features * rows).
class BestSplitBuilder {
 public:
  BestSplitBuilder(const Matrix& x) : x_(x), order_(static_cast<std::size_t>(x.cols())) {
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      auto& o = order_[static_cast<std::size_t>(f)];
      o.resize(static_cast<std::size_t>(x.rows()));
      std::iota(o.begin(), o.end(), 0);
      std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
    }
  }

  DecisionTree build(const Targets& targets, const std::vector<double>& weights, int max_depth,
                     const std::vector<int>& feature_order) const {
    const int n = static_cast<int>(x_.rows());
    const int outputs = targets.outputs;
    DecisionTree tree;
    tree.n_outputs = outputs;
    tree.nodes.emplace_back();
    std::vector<Stats> stats(1, Stats(outputs));
    for (int i = 0; i < n; ++i) targets.add(stats[0], i, weights[static_cast<std::size_t>(i)]);
    std::vector<int> node_of(static_cast<std::size_t>(n), 0);
    std::vector<int> active = {0};

    for (int depth = 0; depth < max_depth && !active.empty(); ++depth) {
      std::vector<int> slot_of(tree.nodes.size(), -1);
      std::vector<int> open;
      for (int node : active) {
        const Stats& st = stats[static_cast<std::size_t>(node)];
        if (st.count >= 2 && !is_pure(st)) {
          slot_of[static_cast<std::size_t>(node)] = static_cast<int>(open.size());
          open.push_back(node);
        }
      }
      if (open.empty()) break;

      const std::size_t m = open.size();
      std::vector<double> best_score(m), best_thr(m, 0.0);
      std::vector<int> best_feature(m, -1);
      for (std::size_t s = 0; s < m; ++s) {
        best_score[s] = stats[static_cast<std::size_t>(open[s])].score();
      }
      std::vector<double> lw(m), ls(m * static_cast<std::size_t>(outputs)), last(m);
      std::vector<char> seen(m);
      for (int f : feature_order) {
        std::fill(lw.begin(), lw.end(), 0.0);
        std::fill(ls.begin(), ls.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        for (int i : order_[static_cast<std::size_t>(f)]) {
          const int slot = slot_of[static_cast<std::size_t>(node_of[static_cast<std::size_t>(i)])];
          if (slot < 0) continue;
          const auto s = static_cast<std::size_t>(slot);
          const double v = x_(i, f);
          if (seen[s] && v > last[s]) {
            const Stats& st = stats[static_cast<std::size_t>(open[s])];
            const double wl = lw[s];
            const double wr = st.w - wl;
            if (wl > 0.0 && wr > 0.0) {
              double sl = 0.0;
              double sr = 0.0;
              for (int c = 0; c < outputs; ++c) {
                const double a = ls[s * static_cast<std::size_t>(outputs) + static_cast<std::size_t>(c)];
                const double b = st.s[static_cast<std::size_t>(c)] - a;
                sl += a * a;
                sr += b * b;
              }
              const double score = sl / wl + sr / wr;
              if (score > best_score[s] + 1e-12 * st.w) {
                best_score[s] = score;
                best_feature[s] = f;
                const double mid = 0.5 * (last[s] + v);
                best_thr[s] = mid < v ? mid : last[s];
              }
            }
          }
          const double w = weights[static_cast<std::size_t>(i)];
          lw[s] += w;
          const int label = targets.y[static_cast<std::size_t>(i)];
          if (targets.regression) {
            ls[s] += w * label;
          } else {
            ls[s * static_cast<std::size_t>(outputs) + static_cast<std::size_t>(label)] += w;
          }
          last[s] = v;
          seen[s] = 1;
        }
      }

      std::vector<int> next;
      std::vector<int> left_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < m; ++s) {
        if (best_feature[s] < 0) continue;
        const int l = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stats.emplace_back(outputs);
        stats.emplace_back(outputs);
        auto& node = tree.nodes[static_cast<std::size_t>(open[s])];
        node.feature = best_feature[s];
        node.threshold = best_thr[s];
        node.left = l;
        node.right = l + 1;
        left_of[static_cast<std::size_t>(open[s])] = l;
        next.push_back(l);
        next.push_back(l + 1);
      }
      for (int i = 0; i < n; ++i) {
        const int parent = node_of[static_cast<std::size_t>(i)];
        if (parent >= static_cast<int>(left_of.size())) continue;
        const int l = left_of[static_cast<std::size_t>(parent)];
        if (l < 0) continue;
        const auto& node = tree.nodes[static_cast<std::size_t>(parent)];
        const int child = x_(i, node.feature) <= node.threshold ? l : l + 1;
        node_of[static_cast<std::size_t>(i)] = child;
        targets.add(stats[static_cast<std::size_t>(child)], i, weights[static_cast<std::size_t>(i)]);
      }
      active = std::move(next);
    }

    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].left < 0) store_leaf(tree, static_cast<int>(k), stats[k]);
    }
    return tree;
  }

 private:
  const Matrix& x_;
  std::vector<std::vector<int>> order_;
};

const double* row_ptr(const Matrix& x, Eigen::Index i) { return x.data() + i * x.cols(); }

double weighted_median(std::vector<std::pair<double, double>>& pv) {
  std::sort(pv.begin(), pv.end());
  double total = 0.0;
  for (const auto& [v, w] : pv) total += w;
  double acc = 0.0;
  for (const auto& [v, w] : pv) {
    acc += w;
    if (acc >= 0.5 * total) return v;
  }
  return pv.back().first;
}

TreeEnsemble samme(const Matrix& x, const Labels& y, const AdaBoostOptions& o, int k,
                   TreeEnsemble e) {
  const auto n = static_cast<std::size_t>(x.rows());
  const BestSplitBuilder builder(x);
  const Targets targets{y, false, k};
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::mt19937_64 rng(o.seed);
  std::vector<int> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), 0);

  for (int round = 0; round < o.n_rounds; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    DecisionTree tree = builder.build(targets, w, o.max_depth, order);
    std::vector<char> miss(n);
    double err = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      miss[i] = tree.predict_class(row_ptr(x, static_cast<Eigen::Index>(i))) != y[i];
      if (miss[i]) err += w[i];
      total += w[i];
    }
    err /= total;
    if (err >= 1.0 - 1.0 / k) break;
    if (err <= 0.0) {
      // A perfect learner outweighs everything before it.
      const double capped = 1e-10;
      e.boost_weights.push_back(o.learning_rate * (std::log((1.0 - capped) / capped) + std::log(k - 1.0)));
      e.trees.push_back(std::move(tree));
      break;
    }
    const double alpha = o.learning_rate * (std::log((1.0 - err) / err) + std::log(k - 1.0));
    e.boost_weights.push_back(alpha);
    e.trees.push_back(std::move(tree));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (double& v : w) v /= sum;
  }
  return e;
}

TreeEnsemble adaboost_r2(const Matrix& x, const Labels& y, const AdaBoostOptions& o,
                         TreeEnsemble e) {
  const auto n = static_cast<std::size_t>(x.rows());
  const BestSplitBuilder builder(x);
  const Targets targets{y, true, 1};
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::mt19937_64 rng(o.seed);
  std::vector<int> order(static_cast<std::size_t>(x.cols()));
  std::iota(order.begin(), order.end(), 0);

  for (int round = 0; round < o.n_rounds; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    DecisionTree tree = builder.build(targets, w, o.max_depth, order);
    std::vector<double> err(n);
    double err_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = std::abs(tree.predict_value(row_ptr(x, static_cast<Eigen::Index>(i))) - y[i]);
      err_max = std::max(err_max, err[i]);
    }
    if (err_max <= 0.0) {
      e.boost_weights.push_back(1.0);
      e.trees.push_back(std::move(tree));
      break;
    }
    double loss = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] /= err_max;
      loss += w[i] * err[i];
      total += w[i];
    }
    loss /= total;
    if (loss >= 0.5) break;
    const double beta = loss / (1.0 - loss);
    e.boost_weights.push_back(o.learning_rate * std::log(1.0 / beta));
    e.trees.push_back(std::move(tree));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::pow(beta, (1.0 - err[i]) * o.learning_rate);
      sum += w[i];
    }
    for (double& v : w) v /= sum;
  }
  return e;
}

}  // namespace

Labels TreeEnsemble::predict(const Matrix& x) const {
  if (x.cols() != n_features) {
    throw std::invalid_argument("ensemble expects " + std::to_string(n_features) +
                                " features, got " + std::to_string(x.cols()));
  }
  Labels out(static_cast<std::size_t>(x.rows()), prior_class);
  if (trees.empty()) return out;
  std::vector<double> votes(static_cast<std::size_t>(n_classes));
  std::vector<std::pair<double, double>> pv(trees.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double* row = row_ptr(x, i);
    int label = prior_class;
    if (target == TargetMode::LabelRegression) {
      if (kind == EnsembleKind::AdaBoost) {
        for (std::size_t t = 0; t < trees.size(); ++t) {
          pv[t] = {trees[t].predict_value(row), boost_weights[t]};
        }
        label = round_to_class(weighted_median(pv), n_classes);
      } else {
        double sum = 0.0;
        for (const auto& t : trees) sum += t.predict_value(row);
        label = round_to_class(sum / static_cast<double>(trees.size()), n_classes);
      }
    } else {
      std::fill(votes.begin(), votes.end(), 0.0);
      for (std::size_t t = 0; t < trees.size(); ++t) {
        votes[static_cast<std::size_t>(trees[t].predict_class(row))] +=
            kind == EnsembleKind::AdaBoost ? boost_weights[t] : 1.0;
      }
      label = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    out[static_cast<std::size_t>(i)] = label;
  }
  return out;
}

TreeEnsemble extra_trees_fit(const Matrix& x, const Labels& y, const ExtraTreesOptions& o,
                             int n_classes) {
  n_classes = validate_training(x, y, n_classes);
  if (o.n_trees < 1) throw std::invalid_argument("n_trees must be at least 1");
  if (o.max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
  if (o.min_samples_split < 2) throw std::invalid_argument("min_samples_split must be at least 2");
  if (o.max_features < 0 || o.max_features > x.cols()) {
    throw std::invalid_argument("max_features must lie in [0, dim]");
  }
  const int k_features =
      o.max_features > 0
          ? o.max_features
          : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(x.cols())))));

  TreeEnsemble e;
  e.kind = EnsembleKind::ExtraTrees;
  e.target = o.target;
  e.n_classes = n_classes;
  e.n_features = static_cast<int>(x.cols());
  e.prior_class = majority_label(y, n_classes);
  e.trees.resize(static_cast<std::size_t>(o.n_trees));

  const bool regression = o.target == TargetMode::LabelRegression;
  const Targets targets{y, regression, regression ? 1 : n_classes};
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < o.n_trees; t = next++) {
      e.trees[static_cast<std::size_t>(t)] =
          build_extra_tree(x, targets, o, k_features, derive_seed(o.seed, static_cast<std::uint64_t>(t)));
    }
  };
  int threads = o.n_threads > 0 ? o.n_threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, o.n_trees);
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return e;
}

TreeEnsemble adaboost_fit(const Matrix& x, const Labels& y, const AdaBoostOptions& o,
                          int n_classes) {
  n_classes = validate_training(x, y, n_classes);
  if (o.n_rounds < 1) throw std::invalid_argument("n_rounds must be at least 1");
  if (o.max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
  if (!(o.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");

  TreeEnsemble e;
  e.kind = EnsembleKind::AdaBoost;
  e.target = o.target;
  e.n_classes = n_classes;
  e.n_features = static_cast<int>(x.cols());
  e.prior_class = majority_label(y, n_classes);
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) return e;
  if (o.target == TargetMode::LabelRegression) return adaboost_r2(x, y, o, std::move(e));
  return samme(x, y, o, n_classes, std::move(e));
}

}  // namespace beamprint::learn
