#include "beamprint/learn/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace beamprint::learn {

namespace {

void check_pair(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw std::invalid_argument("label vectors differ in length");
  if (a.empty()) throw std::invalid_argument("label vectors are empty");
}

}  // namespace

double misclassification_rate(const Labels& predicted, const Labels& truth) {
  check_pair(predicted, truth);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double cluster_purity(const Labels& clusters, const Labels& truth) {
  check_pair(clusters, truth);
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < truth.size(); ++i) ++table[clusters[i]][truth[i]];
  long majority = 0;
  for (const auto& [cluster, counts] : table) {
    int best = 0;
    for (const auto& [cls, c] : counts) best = std::max(best, c);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(truth.size());
}

std::vector<std::vector<int>> confusion_matrix(const Labels& predicted, const Labels& truth,
                                               int n_classes) {
  check_pair(predicted, truth);
  std::vector<std::vector<int>> m(static_cast<std::size_t>(n_classes),
                                  std::vector<int>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 || predicted[i] >= n_classes) {
      throw std::invalid_argument("label outside [0, n_classes)");
    }
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return m;
}

}  // namespace beamprint::learn
