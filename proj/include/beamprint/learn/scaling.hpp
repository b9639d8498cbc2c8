#pragma once

#include "beamprint/learn/matrix.hpp"

namespace beamprint::learn {

enum class ScalingKind { MinMax, ZScore };

/// Per-feature affine map x -> (x - offset) / scale. For MinMax the offset is
/// the training minimum and the scale the training range, so the training
/// split lands in [0, 1]; constant features get scale 1.
struct ScalingModel {
  ScalingKind kind = ScalingKind::MinMax;
  Vector offset;
  Vector scale;

  static ScalingModel fit(const Matrix& x, ScalingKind kind = ScalingKind::MinMax);
  Matrix apply(const Matrix& x) const;
  Eigen::Index dim() const { return offset.size(); }
};

}  // namespace beamprint::learn
