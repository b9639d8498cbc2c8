#pragma once

#include "beamprint/learn/matrix.hpp"

namespace beamprint::learn {

struct PcaModel {
  Vector mean;
  Matrix components;  // n_components x dim, orthonormal rows
  Vector explained_variance;
  Vector explained_variance_ratio;

  Matrix transform(const Matrix& x) const;
  Matrix inverse_transform(const Matrix& projected) const;
  double cumulative_ratio() const { return explained_variance_ratio.sum(); }
  Eigen::Index n_components() const { return components.rows(); }
};

/// Principal axes from the thin SVD of the centered data. Each component's
/// sign is fixed so its largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& x, int n_components);

}  // namespace beamprint::learn
