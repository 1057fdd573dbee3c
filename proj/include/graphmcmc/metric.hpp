#pragma once

#include <Eigen/Dense>

namespace graphmcmc {

/// Distance used for nearest-node projection and ball construction.
///
/// Either plain Euclidean or Mahalanobis with a fixed SPD scale matrix S,
/// d(a,b) = sqrt((a-b)' S^{-1} (a-b)). The Mahalanobis form stores the
/// Cholesky factor of S once; distance evaluations are one triangular solve.
class Metric {
 public:
  /// Euclidean metric.
  Metric();
  /// Mahalanobis metric with scale matrix S (must be SPD).
  explicit Metric(const Eigen::MatrixXd& S);

  /// Mahalanobis from the sample covariance of the rows of `samples`,
  /// inflated by `ridge` on the diagonal. Falls back to Euclidean (and sets
  /// `fell_back`) if the inflated covariance is not positive definite.
  static Metric from_samples(const Eigen::MatrixXd& samples, double ridge,
                             bool* fell_back);

  double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  /// Norm of a single vector under the metric.
  double norm(const Eigen::VectorXd& v) const;
  /// v / norm(v); throws if norm(v) is zero.
  Eigen::VectorXd normalize(const Eigen::VectorXd& v) const;

  bool is_euclidean() const { return euclidean_; }
  int dim() const { return euclidean_ ? -1 : static_cast<int>(llt_.matrixL().rows()); }

 private:
  bool euclidean_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace graphmcmc
