#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "graphmcmc/rng.hpp"

namespace graphmcmc {

/// Unnormalized target density on R^p. Implementations are immutable and
/// safe to share between chains; log_kernel is deterministic.
class Target {
 public:
  virtual ~Target() = default;
  virtual int dim() const = 0;

  /// Unnormalized log density; -inf iff theta is outside the support.
  /// Throws on dimension mismatch or NaN input.
  double log_kernel(const Eigen::VectorXd& theta) const;

 protected:
  virtual double log_kernel_impl(const Eigen::VectorXd& theta) const = 0;
};

struct GmmSpec {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  /// Throws unless weights sum to 1 within 1e-12, dimensions agree, and all
  /// covariances admit a Cholesky factorization.
  void validate() const;
};

/// Finite Gaussian mixture; log_kernel is the normalized mixture log density
/// (the normalizing constant is known, so nothing is dropped).
class GmmTarget : public Target {
 public:
  explicit GmmTarget(GmmSpec spec);

  int dim() const override { return static_cast<int>(spec_.means[0].size()); }
  const GmmSpec& spec() const { return spec_; }

  /// Exact draw from the mixture.
  Eigen::VectorXd sample(Rng& rng) const;

 protected:
  double log_kernel_impl(const Eigen::VectorXd& theta) const override;

 private:
  GmmSpec spec_;
  std::vector<double> log_weights_;
  std::vector<double> log_norms_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts_;
};

/// Two-dimensional posterior with likelihood y_i ~ N(theta_1^2 + theta_2, 1)
/// and standard normal prior on theta. Gaussian constants are kept, so with
/// no observations log_kernel(0,0) = -log(2*pi).
class BananaTarget : public Target {
 public:
  explicit BananaTarget(Eigen::VectorXd y) : y_(std::move(y)) {}

  int dim() const override { return 2; }
  const Eigen::VectorXd& data() const { return y_; }

 protected:
  double log_kernel_impl(const Eigen::VectorXd& theta) const override;

 private:
  Eigen::VectorXd y_;
};

/// Negative-binomial latent Gaussian model.
///
/// Observations y_i at times t_i in [0,1]; latent z ~ N(0, tau * C(h)) with
/// squared-exponential correlation C_ij(h) = exp(-(t_i-t_j)^2/(2h)); counts
/// y_i negative binomial with success probability sigmoid(z_i) and
/// dispersion r. Priors: tau, h ~ Inverse-Gamma(2,1); r half-normal.
/// The likelihood enters through its kernel
///   r*z_i - (r+y_i)*log(1+exp(z_i)) + lgamma(r+y_i) - lgamma(r);
/// only fully theta-independent constants (the 1/y_i! factor) are dropped.
class LgmModel {
 public:
  LgmModel(Eigen::VectorXd t, Eigen::VectorXd y);

  int n() const { return static_cast<int>(t_.size()); }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& y() const { return y_; }

  /// Correlation matrix C(h) (the covariance with tau factored out).
  Eigen::MatrixXd corr_matrix(double h) const;

  /// Negative binomial log likelihood kernel at (z, r).
  double nb_log_likelihood(const Eigen::VectorXd& z, double r) const;

  /// Log posterior kernel with tau and the Polya-Gamma variables integrated
  /// out, on the unconstrained scale: h = softplus(h_u), r = softplus(r_u).
  /// Includes the softplus log-Jacobians.
  double collapsed_log_kernel(const Eigen::VectorXd& z, double h_u,
                              double r_u) const;

 private:
  Eigen::VectorXd t_;
  Eigen::VectorXd y_;
};

/// Full LGM posterior over theta = (z_1..z_n, tau, h, r) on the constrained
/// scale; -inf when tau, h or r is nonpositive. Shares dropped constants
/// with LgmModel::collapsed_log_kernel so that integrating exp(log_kernel)
/// over tau reproduces the collapsed kernel (up to the Jacobian factors).
class LgmTarget : public Target {
 public:
  explicit LgmTarget(std::shared_ptr<const LgmModel> model)
      : model_(std::move(model)) {}

  int dim() const override { return model_->n() + 3; }
  const LgmModel& model() const { return *model_; }

 protected:
  double log_kernel_impl(const Eigen::VectorXd& theta) const override;

 private:
  std::shared_ptr<const LgmModel> model_;
};

/// y_i ~ N(theta_1^2 + theta_2, 1), i.i.d.
Eigen::VectorXd simulate_banana_data(int n, const Eigen::Vector2d& theta_true,
                                     Rng& rng);

/// Times equally spaced in [0,1]; z ~ N(0, tau*C(h)); y_i negative binomial
/// with success probability sigmoid(z_i) and dispersion r.
std::pair<Eigen::VectorXd, Eigen::VectorXd> simulate_lgm_data(int n, double tau,
                                                              double h, double r,
                                                              Rng& rng);

}  // namespace graphmcmc
