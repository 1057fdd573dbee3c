#include "graphmcmc/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace graphmcmc {

Metric::Metric() : euclidean_(true) {}

Metric::Metric(const Eigen::MatrixXd& S) : euclidean_(false) {
  if (S.rows() != S.cols()) throw std::invalid_argument("metric: S must be square");
  llt_.compute(S);
  if (llt_.info() != Eigen::Success)
    throw std::invalid_argument("metric: S is not positive definite");
}

Metric Metric::from_samples(const Eigen::MatrixXd& samples, double ridge,
                            bool* fell_back) {
  if (fell_back) *fell_back = false;
  const Eigen::Index m = samples.rows();
  const Eigen::Index d = samples.cols();
  if (m < 2) {
    if (fell_back) *fell_back = true;
    return Metric();
  }
  Eigen::RowVectorXd mean = samples.colwise().mean();
  Eigen::MatrixXd centered = samples.rowwise() - mean;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(m - 1);
  cov += ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::LLT<Eigen::MatrixXd> probe(cov);
  if (probe.info() != Eigen::Success) {
    if (fell_back) *fell_back = true;
    return Metric();
  }
  return Metric(cov);
}

double Metric::distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return norm(a - b);
}

double Metric::norm(const Eigen::VectorXd& v) const {
  if (euclidean_) return v.norm();
  // ||v||_S = sqrt(v' S^{-1} v) = ||L^{-1} v||_2 with S = L L'.
  Eigen::VectorXd w = llt_.matrixL().solve(v);
  return w.norm();
}

Eigen::VectorXd Metric::normalize(const Eigen::VectorXd& v) const {
  double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("metric: cannot normalize zero vector");
  return v / n;
}

}  // namespace graphmcmc
