#include "beamprint/learn/pca.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace beamprint::learn {

PcaModel pca_fit(const Matrix& x, int n_components) {
  if (x.rows() < 2) throw std::invalid_argument("PCA needs at least two rows");
  const Eigen::Index limit = std::min(x.rows(), x.cols());
  if (n_components < 1 || n_components > limit) {
    throw std::invalid_argument("n_components must lie in [1, " + std::to_string(limit) +
                                "], got " + std::to_string(n_components));
  }

  PcaModel m;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = (x.rowwise() - m.mean.transpose());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double dof = static_cast<double>(x.rows() - 1);
  const double total = centered.squaredNorm() / dof;

  m.components.resize(n_components, x.cols());
  m.explained_variance.resize(n_components);
  for (int k = 0; k < n_components; ++k) {
    Eigen::VectorXd axis = svd.matrixV().col(k);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    m.components.row(k) = axis.transpose();
    m.explained_variance(k) = s(k) * s(k) / dof;
  }
  m.explained_variance_ratio =
      total > 0.0 ? Vector(m.explained_variance / total) : Vector::Zero(n_components);
  return m;
}

Matrix PcaModel::transform(const Matrix& x) const {
  if (x.cols() != mean.size()) {
    throw std::invalid_argument("PCA model expects " + std::to_string(mean.size()) +
                                " features, got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - mean.transpose()) * components.transpose();
}

Matrix PcaModel::inverse_transform(const Matrix& projected) const {
  return (projected * components).rowwise() + mean.transpose();
}

}  // namespace beamprint::learn
