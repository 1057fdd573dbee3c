#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "doctest.h"
#include "graphmcmc/diagnostics.hpp"
#include "graphmcmc/rng.hpp"

using namespace graphmcmc;

TEST_CASE("autocorrelation of a short hand series") {
  Eigen::VectorXd s(4);
  s << 1, 2, 3, 4;
  // Centered series (-1.5,-0.5,0.5,1.5), biased divide-by-N estimator:
  // rho_1 = 1.25/5, rho_2 = -1.5/5, rho_3 = -2.25/5.
  Eigen::VectorXd rho = autocorrelation(s, 3);
  REQUIRE(rho.size() == 4);
  CHECK(rho[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rho[2] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(rho[3] == doctest::Approx(-0.45).epsilon(1e-12));
}

TEST_CASE("autocorrelation error cases") {
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(50, 3.0);
  CHECK_THROWS(autocorrelation(flat, 5));
  Eigen::VectorXd s(4);
  s << 1, 2, 3, 4;
  CHECK_THROWS(autocorrelation(s, 4));  // needs length >= max_lag + 1
}

TEST_CASE("default_max_lag") {
  CHECK(default_max_lag(100) == 25);
  CHECK(default_max_lag(10) == 2);
  CHECK(default_max_lag(4000) == 500);
  CHECK(default_max_lag(1000000) == 500);
}

TEST_CASE("effective sample size on AR(1) chains") {
  // For x_{t+1} = rho x_t + sqrt(1-rho^2) eps, ESS/N -> (1-rho)/(1+rho).
  Rng rng(101);
  const int n = 100000;
  for (double rho : {0.0, 0.5, 0.9}) {
    Eigen::VectorXd x(n);
    x[0] = rng.normal();
    double s = std::sqrt(1.0 - rho * rho);
    for (int i = 1; i < n; ++i) x[i] = rho * x[i - 1] + s * rng.normal();
    double truth = (1.0 - rho) / (1.0 + rho);
    double ess = effective_sample_size(x);
    CHECK(std::abs(ess / n - truth) < 0.15 * truth);
  }
}

TEST_CASE("effective sample size error cases") {
  Eigen::VectorXd tiny = Eigen::VectorXd::Random(99);
  CHECK_THROWS(effective_sample_size(tiny));
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(500, 1.0);
  CHECK_THROWS(effective_sample_size(flat));
}

TEST_CASE("realized esjd hand values") {
  Eigen::MatrixXd s(3, 1);
  s << 0, 1, 3;
  CHECK(realized_esjd(s) == doctest::Approx(2.5).epsilon(1e-12));

  Eigen::MatrixXd t(2, 2);
  t << 0, 0, 3, 4;
  CHECK(realized_esjd(t) == doctest::Approx(25.0).epsilon(1e-12));

  Eigen::MatrixXd one(1, 2);
  one << 1, 2;
  CHECK_THROWS_AS(realized_esjd(one), std::invalid_argument);
}

TEST_CASE("diagnose fills the report and flags degenerate coordinates") {
  Rng rng(7);
  const int n = 400;
  Eigen::MatrixXd samples(n, 2);
  for (int i = 0; i < n; ++i) {
    samples(i, 0) = rng.normal();
    samples(i, 1) = 2.0;  // constant: diagnostics undefined
  }
  KernelTallies tallies;
  tallies.jump_attempts = 0;
  tallies.jump_accepts = 0;
  tallies.baseline_attempts = 500;
  tallies.baseline_accepts = 150;

  DiagnosticsReport rep = diagnose(samples, tallies, 500, 100);
  CHECK(rep.max_lag == default_max_lag(n));
  REQUIRE(rep.ess.size() == 2);
  CHECK(rep.ess[0] > 0.0);
  CHECK(std::isnan(rep.ess[1]));
  CHECK(rep.ess_per_iter[0] == doctest::Approx(rep.ess[0] / 400.0));
  REQUIRE(rep.autocorr.size() == 2);
  CHECK(rep.autocorr[0].size() == rep.max_lag + 1);
  CHECK(rep.autocorr[0][0] == doctest::Approx(1.0));
  CHECK(std::isnan(rep.autocorr[1][0]));
  CHECK(std::isnan(rep.jump_acceptance));  // no attempts
  CHECK(rep.baseline_acceptance == doctest::Approx(0.3));
  CHECK(rep.esjd == doctest::Approx(realized_esjd(samples)));
  CHECK(rep.iterations == 500);
  CHECK(rep.burn_in == 100);
  CHECK(rep.stored == n);
}
