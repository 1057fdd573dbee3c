#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "graphmcmc/rng.hpp"
#include "graphmcmc/sample_graph.hpp"

namespace graphmcmc {

/// Node-selection random walk design problem: find a row-stochastic P
/// supported on the given directed edge set, stationary for pi, minimizing
/// the spectral norm of (P - 1 pi').
struct WalkProblem {
  int m = 0;
  std::vector<std::pair<int, int>> support;  // ordered (from, to); self-loops added
  Eigen::VectorXd pi;

  /// Throws unless pi is strictly positive and sums to 1 (1e-10) and the
  /// support (with self-loops) is strongly connected.
  void validate() const;
};

struct TransitionMatrix {
  Eigen::MatrixXd P;
  double objective = 0.0;  // ||P - 1 pi'||_2
  int iterations = 0;
  bool converged = true;
};

/// Support = tree adjacency plus self-loops (the radius-1 balls); pi
/// proportional to the node densities, floored to stay strictly positive.
/// Directed edges whose endpoint distance is below distance_exclusion are
/// dropped (self-loops are kept).
WalkProblem walk_problem_from_graph(const SampleGraph& graph,
                                    double distance_exclusion = 0.0);

double walk_objective(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi);

/// Metropolized random walk on the support: propose uniformly over
/// out-neighbors, accept with min(1, pi_j deg_i / (pi_i deg_j)), remainder
/// to the self-loop. Feasible by construction (detailed balance).
TransitionMatrix metropolized_reference(const WalkProblem& problem);

/// Best feasible matrix among: the Metropolized reference, lazy mixtures
/// (1-a) P_ref + a I, the rank-one optimum 1 pi' when the support is
/// complete, and a projected-subgradient refinement. Never worse than the
/// reference. converged is cleared when the subgradient phase was still
/// improving by more than tolerance at max_iterations.
TransitionMatrix optimize_transition_matrix(const WalkProblem& problem,
                                            double tolerance = 1e-8,
                                            int max_iterations = 300);

/// Categorical draw from row j of P.
int weighted_ball_draw(const Eigen::MatrixXd& P, int j, Rng& rng);

}  // namespace graphmcmc
