#pragma once

#include <Eigen/Dense>

namespace decopt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Stack of per-agent vectors: row i belongs to agent i, columns span the
/// decision space. All aggregated iterates (x, y, q, w, s, v) use this layout.
using AgentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Network average x̄ = m⁻¹ 1ᵀ X, summed in fixed row order.
inline Vector row_mean(const AgentMatrix& x) {
  Vector mean = Vector::Zero(x.cols());
  for (Index i = 0; i < x.rows(); ++i) mean += x.row(i).transpose();
  return mean / static_cast<double>(x.rows());
}

/// ‖X − 1 x̄ᵀ‖_F
inline double consensus_error(const AgentMatrix& x) {
  const Vector mean = row_mean(x);
  return (x.rowwise() - mean.transpose()).norm();
}

inline AgentMatrix replicate_rows(const Vector& v, Index m) {
  return v.transpose().replicate(m, 1);
}

inline bool all_finite(const AgentMatrix& x) { return x.allFinite(); }

}  // namespace decopt
