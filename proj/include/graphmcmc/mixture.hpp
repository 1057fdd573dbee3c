#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "graphmcmc/diagnostics.hpp"
#include "graphmcmc/jump.hpp"
#include "graphmcmc/kernels.hpp"
#include "graphmcmc/rng.hpp"
#include "graphmcmc/sample_graph.hpp"
#include "graphmcmc/targets.hpp"

namespace graphmcmc {

struct ChainState {
  Eigen::VectorXd theta;
  long iteration = 0;
  KernelTallies tallies;
  std::uint64_t stream_id = 0;
};

struct RunConfig {
  double w = 0.0;  // probability of a graph jump; in [0, 1)
  long n_iterations = 0;
  long burn_in = 0;
  long thinning = 1;
  std::uint64_t seed = 0;
  double l = 0.0;                 // 0: use default_truncation(graph)
  std::vector<int> record;        // stored coordinates; empty = all
  std::uint64_t stream_id = 0;

  void validate(int dim) const;
};

/// One transition of the mixture kernel: with probability w a graph jump,
/// otherwise one baseline step. With w = 0 no selection variate is drawn, so
/// the trajectory is identical to the bare baseline under a shared stream.
void mixture_step(ChainState& state, const SampleGraph* graph,
                  const Target& target, BaselineKernel& baseline,
                  const RunConfig& config, const JumpOptions& jump_opts,
                  Rng& rng, JumpProposal* record = nullptr);

struct RunResult {
  Eigen::MatrixXd samples;  // stored rows x recorded coordinates
  ChainState state;
  KernelTallies burn_in_tallies;
  KernelTallies post_tallies;
  DiagnosticsReport diagnostics;
};

/// Runs a chain from theta0: burn_in iterations discarded, then every
/// thinning-th state stored. Deterministic given config.seed/stream_id.
/// graph is required iff w > 0. When transcript is non-null every jump
/// proposal is appended to it.
RunResult run_chain(const Target& target, const SampleGraph* graph,
                    BaselineKernel& baseline, const RunConfig& config,
                    const Eigen::VectorXd& theta0,
                    const Eigen::MatrixXd* walk_matrix = nullptr,
                    std::vector<JumpProposal>* transcript = nullptr);

}  // namespace graphmcmc
