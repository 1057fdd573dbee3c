#include "graphmcmc/targets.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "graphmcmc/linalg.hpp"

namespace graphmcmc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double Target::log_kernel(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim())
    throw std::invalid_argument("log_kernel: expected dimension " +
                                std::to_string(dim()) + ", got " +
                                std::to_string(theta.size()));
  if (theta.hasNaN()) throw std::invalid_argument("log_kernel: NaN in theta");
  return log_kernel_impl(theta);
}

void GmmSpec::validate() const {
  if (weights.empty() || weights.size() != means.size() ||
      weights.size() != covariances.size())
    throw std::invalid_argument("gmm: component count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("gmm: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("gmm: weights must sum to 1");
  const Eigen::Index p = means[0].size();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (means[k].size() != p || covariances[k].rows() != p ||
        covariances[k].cols() != p)
      throw std::invalid_argument("gmm: dimension mismatch in component " +
                                  std::to_string(k));
    Eigen::LLT<Eigen::MatrixXd> llt(covariances[k]);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("gmm: covariance " + std::to_string(k) +
                                  " is not positive definite");
  }
}

GmmTarget::GmmTarget(GmmSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const double p = static_cast<double>(spec_.means[0].size());
  for (std::size_t k = 0; k < spec_.weights.size(); ++k) {
    llts_.emplace_back(spec_.covariances[k]);
    log_weights_.push_back(std::log(spec_.weights[k]));
    log_norms_.push_back(-0.5 * (p * kLog2Pi + log_det(llts_[k])));
  }
}

double GmmTarget::log_kernel_impl(const Eigen::VectorXd& theta) const {
  const std::size_t K = spec_.weights.size();
  Eigen::VectorXd terms(K);
  for (std::size_t k = 0; k < K; ++k) {
    Eigen::VectorXd w = llts_[k].matrixL().solve(theta - spec_.means[k]);
    terms[k] = log_weights_[k] + log_norms_[k] - 0.5 * w.squaredNorm();
  }
  return logsumexp(terms);
}

Eigen::VectorXd GmmTarget::sample(Rng& rng) const {
  double u = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < spec_.weights.size(); ++k) {
    acc += spec_.weights[k];
    if (u < acc) break;
  }
  Eigen::VectorXd eps(spec_.means[k].size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return spec_.means[k] + llts_[k].matrixL() * eps;
}

double BananaTarget::log_kernel_impl(const Eigen::VectorXd& theta) const {
  const double mu = theta[0] * theta[0] + theta[1];
  const double n = static_cast<double>(y_.size());
  double ll = -0.5 * (y_.array() - mu).square().sum() - 0.5 * n * kLog2Pi;
  double lp = -0.5 * theta.squaredNorm() - kLog2Pi;
  return ll + lp;
}

LgmModel::LgmModel(Eigen::VectorXd t, Eigen::VectorXd y)
    : t_(std::move(t)), y_(std::move(y)) {
  if (t_.size() != y_.size() || t_.size() == 0)
    throw std::invalid_argument("lgm: t and y must have equal positive length");
  for (Eigen::Index i = 0; i < y_.size(); ++i)
    if (y_[i] < 0.0 || y_[i] != std::floor(y_[i]))
      throw std::invalid_argument("lgm: counts must be nonnegative integers");
}

Eigen::MatrixXd LgmModel::corr_matrix(double h) const {
  const Eigen::Index n = t_.size();
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    C(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      double d = t_[i] - t_[j];
      C(i, j) = C(j, i) = std::exp(-d * d / (2.0 * h));
    }
  }
  return C;
}

double LgmModel::nb_log_likelihood(const Eigen::VectorXd& z, double r) const {
  // Full negative-binomial kernel in (z, r); the rising-factorial part
  // lgamma(r+y)-lgamma(r) is constant in z (so it drops out of the z, omega,
  // tau conditionals) but it is what identifies r, and without it the
  // posterior pushes r toward zero and the z update loses all likelihood
  // precision at y=0 observations.
  const double lgr = std::lgamma(r);
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    s += r * z[i] - (r + y_[i]) * softplus(z[i]);
    if (y_[i] > 0.0) s += std::lgamma(r + y_[i]) - lgr;
  }
  return s;
}

double LgmModel::collapsed_log_kernel(const Eigen::VectorXd& z, double h_u,
                                      double r_u) const {
  if (z.size() != t_.size())
    throw std::invalid_argument("lgm: z has wrong length");
  const double n = static_cast<double>(t_.size());
  const double h = softplus(h_u);
  const double r = softplus(r_u);
  Eigen::LLT<Eigen::MatrixXd> llt = jittered_llt(corr_matrix(h), 1.0);
  Eigen::VectorXd w = llt.matrixL().solve(z);
  double quad = w.squaredNorm();
  double out = nb_log_likelihood(z, r);
  // tau ~ Inverse-Gamma(2,1) integrated against the Gaussian in closed form.
  out += std::lgamma(n / 2.0 + 2.0) - 0.5 * log_det(llt) -
         (n / 2.0 + 2.0) * std::log1p(quad / 2.0);
  out += -3.0 * std::log(h) - 1.0 / h;  // h ~ Inverse-Gamma(2,1)
  out += -0.5 * r * r;                  // r half-normal
  out += log_sigmoid(h_u) + log_sigmoid(r_u);  // softplus Jacobians
  return out;
}

double LgmTarget::log_kernel_impl(const Eigen::VectorXd& theta) const {
  const int n = model_->n();
  const double tau = theta[n];
  const double h = theta[n + 1];
  const double r = theta[n + 2];
  if (!(tau > 0.0) || !(h > 0.0) || !(r > 0.0)) return -kInf;
  Eigen::VectorXd z = theta.head(n);
  Eigen::LLT<Eigen::MatrixXd> llt = jittered_llt(model_->corr_matrix(h), 1.0);
  Eigen::VectorXd w = llt.matrixL().solve(z);
  double out = model_->nb_log_likelihood(z, r);
  out += -0.5 * n * std::log(tau) - 0.5 * log_det(llt) -
         w.squaredNorm() / (2.0 * tau);
  out += -3.0 * std::log(tau) - 1.0 / tau;
  out += -3.0 * std::log(h) - 1.0 / h;
  out += -0.5 * r * r;
  return out;
}

Eigen::VectorXd simulate_banana_data(int n, const Eigen::Vector2d& theta_true,
                                     Rng& rng) {
  if (n < 1) throw std::invalid_argument("simulate_banana_data: n must be >= 1");
  const double mu = theta_true[0] * theta_true[0] + theta_true[1];
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = mu + rng.normal();
  return y;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> simulate_lgm_data(int n, double tau,
                                                              double h, double r,
                                                              Rng& rng) {
  if (n < 1) throw std::invalid_argument("simulate_lgm_data: n must be >= 1");
  if (!(tau > 0.0) || !(h > 0.0) || !(r > 0.0))
    throw std::invalid_argument("simulate_lgm_data: tau, h, r must be positive");
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i)
    t[i] = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
  LgmModel shape(t, Eigen::VectorXd::Zero(n));
  Eigen::MatrixXd Sigma = tau * shape.corr_matrix(h);
  Eigen::LLT<Eigen::MatrixXd> llt = jittered_llt(Sigma, tau);
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps[i] = rng.normal();
  Eigen::VectorXd z = llt.matrixL() * eps;
  // NB(r, p = sigmoid(z)) as a gamma-Poisson mixture: the gamma scale is
  // (1-p)/p = exp(-z).
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double lambda = rng.gamma(r) * std::exp(-z[i]);
    y[i] = static_cast<double>(rng.poisson(lambda));
  }
  return {t, y};
}

}  // namespace graphmcmc
