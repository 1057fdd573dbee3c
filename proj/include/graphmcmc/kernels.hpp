#pragma once

#include <Eigen/Dense>
#include <memory>

#include "graphmcmc/rng.hpp"
#include "graphmcmc/targets.hpp"

namespace graphmcmc {

enum class RwmProposal { uniform_box, gaussian };

struct RwmConfig {
  RwmProposal proposal = RwmProposal::gaussian;
  double step_size = 1.0;  // Gaussian sd, or uniform box half-width
};

/// One random-walk Metropolis step with a symmetric proposal.
Eigen::VectorXd rwm_step(const Target& target, const Eigen::VectorXd& theta,
                         const RwmConfig& config, Rng& rng,
                         bool* accepted = nullptr);

/// Polya-Gamma PG(b, c) draw via the truncated gamma series
///   omega = (1/(2 pi^2)) sum_{k=1..K} g_k / ((k-1/2)^2 + c^2/(4 pi^2)),
/// g_k ~ Gamma(b, 1), truncated at K = 200. E[omega] = b tanh(c/2)/(2c).
double sample_polya_gamma(double b, double c, Rng& rng);

double inverse_gamma_draw(double shape, double rate, Rng& rng);

/// Multivariate normal via Cholesky of the covariance (with jitter ladder).
Eigen::VectorXd mvn_draw(const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& covariance, Rng& rng);

struct LgmGibbsState {
  Eigen::VectorXd z;
  Eigen::VectorXd omega;
  double tau = 1.0;
  double h_u = 0.0;  // unconstrained h: h = softplus(h_u)
  double r_u = 0.0;  // unconstrained r
};

/// One Gibbs sweep: omega | z,r (Polya-Gamma), z | omega,tau,h,r (Gaussian),
/// tau | z,h (inverse gamma), then one joint Gaussian RWM step on (h_u, r_u)
/// against the collapsed kernel. When hr_accepted is given it receives the
/// RWM acceptance indicator.
LgmGibbsState lgm_gibbs_step(const LgmModel& model, const LgmGibbsState& state,
                             const RwmConfig& hr_config, Rng& rng,
                             bool* hr_accepted = nullptr);

/// Robbins-Monro adaptation of a log step size toward a target acceptance
/// rate. Call update() after each step while adapting; freeze() stops it.
class StepSizeTuner {
 public:
  StepSizeTuner(double initial_step, double target_rate = 0.234);

  double step() const { return std::exp(log_step_); }
  void update(double acceptance);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  double log_step_;
  double target_rate_;
  long count_ = 0;
  bool frozen_ = false;
};

/// Markov transition kernel advancing a chain state vector. Implementations
/// own any adaptation state; target objects are shared read-only.
class BaselineKernel {
 public:
  virtual ~BaselineKernel() = default;
  virtual Eigen::VectorXd step(const Target& target, const Eigen::VectorXd& theta,
                               Rng& rng, bool* accepted) = 0;
  /// Enable/disable burn-in adaptation. Default: nothing to adapt.
  virtual void set_adapting(bool) {}
};

class RwmKernel : public BaselineKernel {
 public:
  explicit RwmKernel(RwmConfig config) : config_(config) {}
  Eigen::VectorXd step(const Target& target, const Eigen::VectorXd& theta,
                       Rng& rng, bool* accepted) override {
    return rwm_step(target, theta, config_, rng, accepted);
  }

 private:
  RwmConfig config_;
};

/// Gibbs sweep kernel over theta = (z, tau, h, r) on the constrained scale.
/// The (h_u, r_u) random-walk step size adapts toward 0.234 acceptance while
/// set_adapting(true), and is frozen otherwise.
class LgmGibbsKernel : public BaselineKernel {
 public:
  LgmGibbsKernel(std::shared_ptr<const LgmModel> model, double initial_step);

  Eigen::VectorXd step(const Target& target, const Eigen::VectorXd& theta,
                       Rng& rng, bool* accepted) override;
  void set_adapting(bool on) override;

  double hr_step_size() const { return tuner_.step(); }

 private:
  std::shared_ptr<const LgmModel> model_;
  StepSizeTuner tuner_;
  bool adapting_ = false;
};

}  // namespace graphmcmc
