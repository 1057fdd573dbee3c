#pragma once

#include <Eigen/Dense>

namespace graphmcmc {

/// Cholesky of M + jitter*scale*I, escalating jitter from 1e-8 to 1e-4
/// (factors of 10) until the factorization succeeds. Throws on failure.
Eigen::LLT<Eigen::MatrixXd> jittered_llt(const Eigen::MatrixXd& M, double scale);

/// log(det(A)) from its Cholesky factorization.
double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt);

/// log(sum(exp(x))) without overflow.
double logsumexp(const Eigen::VectorXd& x);

/// log(1 + exp(x)) without overflow.
double softplus(double x);
/// Inverse of softplus: x with log(1+exp(x)) = y, y > 0.
double inv_softplus(double y);
/// log(1 / (1 + exp(-x))).
double log_sigmoid(double x);

}  // namespace graphmcmc
