#include "graphmcmc/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphmcmc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

int default_max_lag(int n) { return std::min(n / 4, 500); }

Eigen::VectorXd autocorrelation(const Eigen::VectorXd& series, int max_lag) {
  const int n = static_cast<int>(series.size());
  if (max_lag < 0) throw std::invalid_argument("autocorrelation: max_lag < 0");
  if (n <= max_lag)
    throw std::invalid_argument("autocorrelation: series length must exceed max_lag");
  const double mean = series.mean();
  Eigen::VectorXd centered = series.array() - mean;
  const double denom = centered.squaredNorm();
  if (denom == 0.0)
    throw std::invalid_argument("autocorrelation: series has zero variance");
  Eigen::VectorXd rho(max_lag + 1);
  for (int k = 0; k <= max_lag; ++k) {
    // Divide-by-N convention: the common 1/N cancels in the ratio.
    rho[k] = centered.head(n - k).dot(centered.tail(n - k)) / denom;
  }
  return rho;
}

double effective_sample_size(const Eigen::VectorXd& series) {
  const int n = static_cast<int>(series.size());
  if (n < 100)
    throw std::invalid_argument("effective_sample_size: need at least 100 points");
  Eigen::VectorXd rho = autocorrelation(series, default_max_lag(n));
  // Geyer: sum pairs rho(2m) + rho(2m+1) while they stay positive.
  double tau = -1.0;
  for (int m = 0; 2 * m + 1 < rho.size(); ++m) {
    double pair = rho[2 * m] + rho[2 * m + 1];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  // Strongly anticorrelated chains can drive the estimate nonpositive; floor
  // it at a tiny positive value so super-efficiency is reported as a large
  // finite ESS.
  if (tau <= 0.0) tau = 2.0 / n;
  return n / tau;
}

double realized_esjd(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("realized_esjd: need at least 2 rows");
  double total = 0.0;
  for (Eigen::Index t = 0; t + 1 < n; ++t)
    total += (samples.row(t + 1) - samples.row(t)).squaredNorm();
  return total / static_cast<double>(n - 1);
}

DiagnosticsReport diagnose(const Eigen::MatrixXd& samples,
                           const KernelTallies& tallies, long iterations,
                           long burn_in, int max_lag) {
  DiagnosticsReport rep;
  rep.iterations = iterations;
  rep.burn_in = burn_in;
  rep.stored = samples.rows();
  const int n = static_cast<int>(samples.rows());
  if (max_lag < 0) max_lag = default_max_lag(n);
  rep.max_lag = max_lag;
  const double post = static_cast<double>(std::max<long>(iterations - burn_in, 1));
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    Eigen::VectorXd col = samples.col(c);
    try {
      rep.autocorr.push_back(autocorrelation(col, max_lag));
    } catch (const std::invalid_argument&) {
      rep.autocorr.push_back(Eigen::VectorXd::Constant(max_lag + 1, kNaN));
    }
    try {
      double ess = effective_sample_size(col);
      rep.ess.push_back(ess);
      rep.ess_per_iter.push_back(ess / post);
    } catch (const std::invalid_argument&) {
      rep.ess.push_back(kNaN);
      rep.ess_per_iter.push_back(kNaN);
    }
  }
  rep.esjd = n >= 2 ? realized_esjd(samples) : 0.0;
  rep.jump_acceptance =
      tallies.jump_attempts > 0
          ? static_cast<double>(tallies.jump_accepts) / tallies.jump_attempts
          : kNaN;
  rep.baseline_acceptance =
      tallies.baseline_attempts > 0
          ? static_cast<double>(tallies.baseline_accepts) / tallies.baseline_attempts
          : kNaN;
  return rep;
}

}  // namespace graphmcmc
