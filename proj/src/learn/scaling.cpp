#include "beamprint/learn/scaling.hpp"

#include <stdexcept>

namespace beamprint::learn {

ScalingModel ScalingModel::fit(const Matrix& x, ScalingKind kind) {
  if (x.rows() == 0) throw std::invalid_argument("cannot fit scaling on an empty matrix");
  ScalingModel m;
  m.kind = kind;
  if (kind == ScalingKind::MinMax) {
    m.offset = x.colwise().minCoeff().transpose();
    m.scale = (x.colwise().maxCoeff() - x.colwise().minCoeff()).transpose();
  } else {
    m.offset = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - m.offset.transpose();
    m.scale = (centered.array().square().colwise().sum() / static_cast<double>(x.rows()))
                  .sqrt()
                  .transpose();
  }
  for (Eigen::Index j = 0; j < m.scale.size(); ++j) {
    if (!(m.scale(j) > 0.0)) m.scale(j) = 1.0;
  }
  return m;
}

Matrix ScalingModel::apply(const Matrix& x) const {
  if (x.cols() != offset.size()) {
    throw std::invalid_argument("scaling model expects " + std::to_string(offset.size()) +
                                " features, got " + std::to_string(x.cols()));
  }
  return ((x.rowwise() - offset.transpose()).array().rowwise() / scale.transpose().array())
      .matrix();
}

}  // namespace beamprint::learn
