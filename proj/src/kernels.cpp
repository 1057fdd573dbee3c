#include "graphmcmc/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "graphmcmc/linalg.hpp"

namespace graphmcmc {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr int kPgTruncation = 200;
}  // namespace

Eigen::VectorXd rwm_step(const Target& target, const Eigen::VectorXd& theta,
                         const RwmConfig& config, Rng& rng, bool* accepted) {
  const double s = config.step_size;
  if (!(s > 0.0)) throw std::invalid_argument("rwm: step size must be positive");
  Eigen::VectorXd proposal(theta.size());
  if (config.proposal == RwmProposal::gaussian) {
    for (Eigen::Index k = 0; k < theta.size(); ++k)
      proposal[k] = theta[k] + s * rng.normal();
  } else {
    for (Eigen::Index k = 0; k < theta.size(); ++k)
      proposal[k] = theta[k] + rng.uniform(-s, s);
  }
  double log_ratio = target.log_kernel(proposal) - target.log_kernel(theta);
  bool acc = rng.uniform() < (log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio));
  if (accepted) *accepted = acc;
  return acc ? proposal : theta;
}

double sample_polya_gamma(double b, double c, Rng& rng) {
  if (!(b > 0.0)) throw std::invalid_argument("polya_gamma: b must be positive");
  const double c2 = c * c / (4.0 * kPi * kPi);
  double sum = 0.0;
  for (int k = 1; k <= kPgTruncation; ++k) {
    double denom = (k - 0.5) * (k - 0.5) + c2;
    sum += rng.gamma(b) / denom;
  }
  return sum / (2.0 * kPi * kPi);
}

double inverse_gamma_draw(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("inverse_gamma: shape and rate must be positive");
  return rate / rng.gamma(shape);
}

Eigen::VectorXd mvn_draw(const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& covariance, Rng& rng) {
  double scale = covariance.diagonal().cwiseAbs().maxCoeff();
  if (scale <= 0.0) scale = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt = jittered_llt(covariance, scale);
  Eigen::VectorXd eps(mean.size());
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps[k] = rng.normal();
  return mean + llt.matrixL() * eps;
}

LgmGibbsState lgm_gibbs_step(const LgmModel& model, const LgmGibbsState& state,
                             const RwmConfig& hr_config, Rng& rng,
                             bool* hr_accepted) {
  const int n = model.n();
  if (state.z.size() != n) throw std::invalid_argument("gibbs: z has wrong length");
  if (!(state.tau > 0.0)) throw std::invalid_argument("gibbs: tau must be positive");
  LgmGibbsState next = state;
  const double r = softplus(state.r_u);
  const double h = softplus(state.h_u);

  // omega_i | z, r  ~  PG(r + y_i, z_i)
  next.omega.resize(n);
  for (int i = 0; i < n; ++i)
    next.omega[i] = sample_polya_gamma(r + model.y()[i], state.z[i], rng);

  // z | omega, tau, h, r: Gaussian with precision Sigma^{-1} + diag(omega)
  // and mean solving Lambda mu = (r - y)/2.
  Eigen::MatrixXd C = model.corr_matrix(h);
  Eigen::LLT<Eigen::MatrixXd> llt_sigma = jittered_llt(state.tau * C, state.tau);
  Eigen::MatrixXd lambda =
      llt_sigma.solve(Eigen::MatrixXd::Identity(n, n));
  lambda.diagonal() += next.omega;
  Eigen::LLT<Eigen::MatrixXd> llt_lambda(lambda);
  if (llt_lambda.info() != Eigen::Success) llt_lambda = jittered_llt(lambda, 1.0);
  Eigen::VectorXd bvec = (r - model.y().array()).matrix() / 2.0;
  Eigen::VectorXd mu = llt_lambda.solve(bvec);
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps[i] = rng.normal();
  next.z = mu + llt_lambda.matrixU().solve(eps);

  // tau | z, h ~ InverseGamma(n/2 + 2, z' C^{-1} z / 2 + 1)
  Eigen::LLT<Eigen::MatrixXd> llt_corr = jittered_llt(C, 1.0);
  double quad = llt_corr.matrixL().solve(next.z).squaredNorm();
  next.tau = inverse_gamma_draw(n / 2.0 + 2.0, quad / 2.0 + 1.0, rng);

  // (h_u, r_u) | z: joint Gaussian RWM on the collapsed kernel.
  const double s = hr_config.step_size;
  double h_u_star = state.h_u + s * rng.normal();
  double r_u_star = state.r_u + s * rng.normal();
  double log_ratio = model.collapsed_log_kernel(next.z, h_u_star, r_u_star) -
                     model.collapsed_log_kernel(next.z, state.h_u, state.r_u);
  bool acc = rng.uniform() < (log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio));
  if (acc) {
    next.h_u = h_u_star;
    next.r_u = r_u_star;
  }
  if (hr_accepted) *hr_accepted = acc;
  return next;
}

StepSizeTuner::StepSizeTuner(double initial_step, double target_rate)
    : log_step_(std::log(initial_step)), target_rate_(target_rate) {
  if (!(initial_step > 0.0))
    throw std::invalid_argument("tuner: initial step must be positive");
}

void StepSizeTuner::update(double acceptance) {
  if (frozen_) return;
  ++count_;
  double gain = std::pow(static_cast<double>(count_), -0.6);
  log_step_ += gain * (acceptance - target_rate_);
}

LgmGibbsKernel::LgmGibbsKernel(std::shared_ptr<const LgmModel> model,
                               double initial_step)
    : model_(std::move(model)), tuner_(initial_step) {}

void LgmGibbsKernel::set_adapting(bool on) { adapting_ = on; }

Eigen::VectorXd LgmGibbsKernel::step(const Target& target,
                                     const Eigen::VectorXd& theta, Rng& rng,
                                     bool* accepted) {
  (void)target;
  const int n = model_->n();
  if (theta.size() != n + 3)
    throw std::invalid_argument("gibbs: state has wrong dimension");
  LgmGibbsState state;
  state.z = theta.head(n);
  state.tau = theta[n];
  state.h_u = inv_softplus(theta[n + 1]);
  state.r_u = inv_softplus(theta[n + 2]);
  RwmConfig hr{RwmProposal::gaussian, tuner_.step()};
  bool acc = false;
  LgmGibbsState next = lgm_gibbs_step(*model_, state, hr, rng, &acc);
  if (adapting_) tuner_.update(acc ? 1.0 : 0.0);
  if (accepted) *accepted = acc;
  Eigen::VectorXd out(n + 3);
  out.head(n) = next.z;
  out[n] = next.tau;
  out[n + 1] = softplus(next.h_u);
  out[n + 2] = softplus(next.r_u);
  return out;
}

}  // namespace graphmcmc
