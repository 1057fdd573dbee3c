#pragma once

#include <Eigen/Dense>

#include "graphmcmc/rng.hpp"
#include "graphmcmc/sample_graph.hpp"
#include "graphmcmc/targets.hpp"

namespace graphmcmc {

/// One graph-jump proposal: project the current point to its nearest node j,
/// pick a destination node i in the radius-r ball around j (uniformly, or by
/// a supplied transition-matrix row), then propose uniformly on the segment
/// of the line beta_i + xi*v lying inside i's nearest-node cell, truncated
/// at half-length l.
struct JumpProposal {
  int source = -1;    // j
  int proposed = -1;  // i
  Eigen::VectorXd v;  // unit direction in the graph metric
  double a_fwd = 0.0, b_fwd = 0.0;  // segment at node i
  double a_rev = 0.0, b_rev = 0.0;  // segment at node j, same direction
  double xi = 0.0;
  Eigen::VectorXd theta_star;
  double log_accept_ratio = 0.0;
  bool accepted = false;
};

/// (theta - beta_j) normalized in the metric norm; a uniformly random unit
/// direction when the two points are closer than 1e-12.
Eigen::VectorXd direction_vector(const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& beta_j,
                                 const Metric& metric, Rng& rng);

/// Endpoints (a, b) of the widest interval with -l <= a <= 0 <= b <= l such
/// that nearest_node(beta_i + xi*v) == i throughout (a, b), found by
/// bisection to absolute tolerance tol. Throws if beta_i itself does not
/// project to i.
std::pair<double, double> segment_bounds(const SampleGraph& graph, int i,
                                         const Eigen::VectorXd& v, double l,
                                         double tol);

struct JumpOptions {
  double l = 1.0;
  double bisect_tol_factor = 1e-8;  // tol = factor * l
  // Optional row-stochastic node-selection matrix; replaces the uniform
  // ball draw and the ball-size factors in the acceptance ratio.
  const Eigen::MatrixXd* walk_matrix = nullptr;
};

JumpProposal propose_jump(const SampleGraph& graph, const Target& target,
                          const Eigen::VectorXd& theta, const JumpOptions& opts,
                          Rng& rng);

/// Metropolis-Hastings accept/reject on top of propose_jump. Returns the new
/// state; on rejection the input state is returned unchanged.
Eigen::VectorXd jump_step(const SampleGraph& graph, const Target& target,
                          const Eigen::VectorXd& theta, const JumpOptions& opts,
                          Rng& rng, JumpProposal* record = nullptr);

/// Default segment half-length: twice the median pairwise node distance.
double default_truncation(const SampleGraph& graph);

}  // namespace graphmcmc
