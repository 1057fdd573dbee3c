#pragma once

#include <Eigen/Dense>
#include <vector>

namespace graphmcmc {

/// Biased (divide-by-N) sample autocorrelation at lags 0..max_lag.
/// Throws if the series has zero variance or is shorter than max_lag + 1.
Eigen::VectorXd autocorrelation(const Eigen::VectorXd& series, int max_lag);

/// max_lag used when none is given: min(N/4, 500).
int default_max_lag(int n);

/// ESS = N / (1 + 2 sum rho(k)) with the sum truncated by Geyer's initial
/// positive sequence rule on lag pairs. Not clamped at N: anticorrelated
/// chains may report super-efficiency. Throws on zero variance or N < 100.
double effective_sample_size(const Eigen::VectorXd& series);

/// Mean squared Euclidean displacement between consecutive rows.
double realized_esjd(const Eigen::MatrixXd& samples);

struct KernelTallies {
  long jump_attempts = 0;
  long jump_accepts = 0;
  long baseline_attempts = 0;
  long baseline_accepts = 0;
};

struct DiagnosticsReport {
  std::vector<double> ess;            // per stored coordinate; NaN if undefined
  std::vector<double> ess_per_iter;   // ess / post-burn-in iterations
  std::vector<Eigen::VectorXd> autocorr;  // per coordinate, lags 0..max_lag
  int max_lag = 0;
  double esjd = 0.0;
  double jump_acceptance = 0.0;      // NaN when no attempts
  double baseline_acceptance = 0.0;  // NaN when no attempts
  long iterations = 0;
  long burn_in = 0;
  long stored = 0;
};

/// Report over stored post-burn-in samples (rows) and the run's tallies.
/// Coordinates whose diagnostics are undefined (zero variance) get NaN
/// entries instead of raising.
DiagnosticsReport diagnose(const Eigen::MatrixXd& samples,
                           const KernelTallies& tallies, long iterations,
                           long burn_in, int max_lag = -1);

}  // namespace graphmcmc
