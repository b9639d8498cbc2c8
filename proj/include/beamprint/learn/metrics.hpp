#pragma once

#include <vector>

#include "beamprint/learn/matrix.hpp"

namespace beamprint::learn {

/// Fraction of positions where the two label vectors differ.
double misclassification_rate(const Labels& predicted, const Labels& truth);

/// Sum over clusters of the majority true-class count, divided by n.
double cluster_purity(const Labels& clusters, const Labels& truth);

/// counts[true][predicted]; labels must lie in [0, n_classes).
std::vector<std::vector<int>> confusion_matrix(const Labels& predicted, const Labels& truth,
                                               int n_classes);

}  // namespace beamprint::learn
