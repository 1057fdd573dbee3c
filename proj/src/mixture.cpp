#include "graphmcmc/mixture.hpp"

#include <cmath>
#include <stdexcept>

namespace graphmcmc {

void RunConfig::validate(int dim) const {
  if (!(w >= 0.0 && w < 1.0))
    throw std::invalid_argument("run: w must be in [0, 1)");
  if (n_iterations <= 0)
    throw std::invalid_argument("run: n_iterations must be positive");
  if (burn_in < 0 || burn_in >= n_iterations)
    throw std::invalid_argument("run: burn_in must be in [0, n_iterations)");
  if (thinning < 1) throw std::invalid_argument("run: thinning must be >= 1");
  for (int c : record)
    if (c < 0 || c >= dim)
      throw std::invalid_argument("run: recorded coordinate " +
                                  std::to_string(c) + " out of range");
}

void mixture_step(ChainState& state, const SampleGraph* graph,
                  const Target& target, BaselineKernel& baseline,
                  const RunConfig& config, const JumpOptions& jump_opts,
                  Rng& rng, JumpProposal* record) {
  bool take_jump = config.w > 0.0 && rng.bernoulli(config.w);
  if (take_jump) {
    JumpProposal prop;
    state.theta = jump_step(*graph, target, state.theta, jump_opts, rng, &prop);
    state.tallies.jump_attempts += 1;
    state.tallies.jump_accepts += prop.accepted ? 1 : 0;
    if (record) *record = prop;
  } else {
    bool accepted = false;
    state.theta = baseline.step(target, state.theta, rng, &accepted);
    state.tallies.baseline_attempts += 1;
    state.tallies.baseline_accepts += accepted ? 1 : 0;
  }
  state.iteration += 1;
}

RunResult run_chain(const Target& target, const SampleGraph* graph,
                    BaselineKernel& baseline, const RunConfig& config,
                    const Eigen::VectorXd& theta0,
                    const Eigen::MatrixXd* walk_matrix,
                    std::vector<JumpProposal>* transcript) {
  config.validate(target.dim());
  if (config.w > 0.0 && graph == nullptr)
    throw std::invalid_argument("run: w > 0 requires a graph");
  if (theta0.size() != target.dim())
    throw std::invalid_argument("run: theta0 has wrong dimension");

  std::vector<int> record = config.record;
  if (record.empty())
    for (int c = 0; c < target.dim(); ++c) record.push_back(c);

  JumpOptions jump_opts;
  if (graph != nullptr) {
    jump_opts.l = config.l > 0.0 ? config.l : default_truncation(*graph);
    jump_opts.walk_matrix = walk_matrix;
  }

  RunResult result;
  const long stored_total =
      (config.n_iterations - config.burn_in + config.thinning - 1) / config.thinning;
  result.samples.resize(stored_total, static_cast<Eigen::Index>(record.size()));

  Rng rng = Rng(config.seed).substream(config.stream_id);
  ChainState state;
  state.theta = theta0;
  state.stream_id = config.stream_id;

  baseline.set_adapting(true);
  long row = 0;
  for (long t = 1; t <= config.n_iterations; ++t) {
    if (t == config.burn_in + 1) {
      baseline.set_adapting(false);
      result.burn_in_tallies = state.tallies;
    }
    JumpProposal prop;
    bool want_record = transcript != nullptr;
    mixture_step(state, graph, target, baseline, config, jump_opts, rng,
                 want_record ? &prop : nullptr);
    if (want_record && prop.source >= 0) transcript->push_back(prop);
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thinning == 0) {
      for (std::size_t c = 0; c < record.size(); ++c)
        result.samples(row, static_cast<Eigen::Index>(c)) = state.theta[record[c]];
      ++row;
    }
  }
  result.post_tallies.jump_attempts =
      state.tallies.jump_attempts - result.burn_in_tallies.jump_attempts;
  result.post_tallies.jump_accepts =
      state.tallies.jump_accepts - result.burn_in_tallies.jump_accepts;
  result.post_tallies.baseline_attempts =
      state.tallies.baseline_attempts - result.burn_in_tallies.baseline_attempts;
  result.post_tallies.baseline_accepts =
      state.tallies.baseline_accepts - result.burn_in_tallies.baseline_accepts;

  result.diagnostics =
      diagnose(result.samples, result.post_tallies, config.n_iterations,
               config.burn_in);
  result.state = state;
  return result;
}

}  // namespace graphmcmc
