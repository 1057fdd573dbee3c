#include "graphmcmc/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphmcmc {

Eigen::LLT<Eigen::MatrixXd> jittered_llt(const Eigen::MatrixXd& M, double scale) {
  const Eigen::Index n = M.rows();
  for (double jitter = 1e-8; jitter <= 1.0000001e-4; jitter *= 10.0) {
    Eigen::MatrixXd A = M;
    A.diagonal().array() += jitter * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw std::runtime_error("cholesky failed after maximum jitter " +
                           std::to_string(1e-4 * scale) + " on a " +
                           std::to_string(n) + "x" + std::to_string(n) +
                           " matrix");
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double logsumexp(const Eigen::VectorXd& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double inv_softplus(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("inv_softplus: argument must be positive");
  // log(exp(y) - 1) = y + log(1 - exp(-y)), stable for large y.
  return y + std::log(-std::expm1(-y));
}

double log_sigmoid(double x) { return -softplus(-x); }

}  // namespace graphmcmc
