#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graphmcmc/kernels.hpp"
#include "graphmcmc/mixture.hpp"
#include "graphmcmc/sample_graph.hpp"
#include "graphmcmc/targets.hpp"

namespace graphmcmc {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides every block seed
  bool transcript = false;
};

struct TargetBlock {
  bool present = false;
  std::string kind;       // gmm | banana | lgm
  GmmSpec gmm;            // kind == gmm
  std::string data_file;  // banana | lgm; resolved against the out dir
};

struct SimulateBlock {
  bool present = false;
  long n = 100;
  std::uint64_t seed = 11;
  Eigen::Vector2d theta_true{0.0, 1.0};  // banana
  double tau = 1.0, h = 0.25, r = 2.0;   // lgm
};

struct SamplesBlock {
  bool present = false;
  std::string source;  // csv | mixture | baseline_subsample
  std::string file;    // csv source
  long m = 0;
  GmmSpec mixture;  // mixture source
  std::uint64_t seed = 22;
  long iterations = 0, burn_in = 0, stride = 1;  // subsample source
};

struct GraphBlock {
  bool present = false;
  std::string metric = "euclidean";  // euclidean | mahalanobis
  double kappa = 1.0;
  int r = 3;
  std::vector<double> kappa_grid;  // nonempty: grid-search kappa
  std::vector<int> r_grid;         // nonempty: grid-search r
  double l = 0.0;                  // 0: l_factor * median pairwise distance
  double l_factor = 2.0;
  bool walk_optimize = false;
  double distance_exclusion = 0.0;
  double walk_tolerance = 1e-8;
  int walk_max_iterations = 300;
};

struct RunBlock {
  bool present = false;
  double w = 0.0;
  long iterations = 1000;
  long burn_in = 0;
  long thinning = 1;
  std::string kernel = "rwm_gaussian";  // rwm_gaussian | rwm_uniform | gibbs
  double step_size = 1.0;
  std::string init;  // empty, zeros, node0, model_default, or coordinates
  std::vector<int> record;
  std::uint64_t seed = 33;
  std::uint64_t stream_id = 0;
};

struct ScalingBlock {
  bool present = false;
  std::vector<long> n_list{100};
  std::vector<long> m_list{1600};
  long iterations = 2000;
  double w = 0.5;
  int r = 3;
  double kappa = 1.0;
  long replicates = 5;
  long pilot_iterations = 2000;
  long pilot_burn_in = 400;
  double step_size = 0.1;  // initial (h, r) random-walk step for the sweeps
  double tau = 1.0, h = 0.25, data_r = 2.0;
  std::uint64_t seed = 44;
};

struct DiagnoseBlock {
  bool present = false;
  std::string file;
  int max_lag = -1;
};

/// Parsed experiment configuration. Parsing consumes every recognized key
/// and rejects anything unknown, so shipped configs cannot drift silently.
struct ExperimentConfig {
  TargetBlock target;
  SimulateBlock simulate;
  SamplesBlock samples;
  GraphBlock graph;
  RunBlock run;
  ScalingBlock scaling;
  DiagnoseBlock diagnose;

  static ExperimentConfig load(const std::string& path, const CliOptions& cli);
};

struct TargetBundle {
  std::string kind;
  std::unique_ptr<Target> target;
  std::shared_ptr<const LgmModel> model;  // lgm only
};

/// Instantiates the target; banana and lgm read their data files.
TargetBundle make_target(const ExperimentConfig& config, const CliOptions& cli);

/// Approximate samples per the [samples] block: a CSV file, i.i.d. mixture
/// draws, or a thinned baseline pilot run.
Eigen::MatrixXd acquire_samples(const ExperimentConfig& config,
                                const CliOptions& cli,
                                const TargetBundle& bundle);

std::unique_ptr<BaselineKernel> make_kernel(const std::string& kind,
                                            double step_size,
                                            const TargetBundle& bundle);

/// Starting point: explicit coordinates, zeros, graph node 0, or the model
/// default (lgm: z = 0, tau = 1, h = 0.25, r = 2; otherwise zeros). An empty
/// spec picks node0 when a graph is present, else the model default.
Eigen::VectorXd initial_point(const std::string& init, const TargetBundle& bundle,
                              const SampleGraph* graph);

/// Column names for stored coordinates (lgm: z_i, tau, h, r; else theta_i).
std::vector<std::string> coordinate_names(const std::string& kind, int dim,
                                          const std::vector<int>& record);

struct GraphArtifacts {
  SampleGraph graph;
  double l = 0.0;
  bool has_walk_matrix = false;
  Eigen::MatrixXd walk_matrix;
};

/// Rebuilds the graph written by cmd_build_graph from beta.csv plus the
/// stored parameters, verifying the total cost matches.
GraphArtifacts load_graph_artifacts(const ExperimentConfig& config,
                                    const CliOptions& cli,
                                    const TargetBundle& bundle);

void cmd_simulate(const ExperimentConfig& config, const CliOptions& cli);
void cmd_build_graph(const ExperimentConfig& config, const CliOptions& cli);
void cmd_run(const ExperimentConfig& config, const CliOptions& cli);
void cmd_diagnose(const ExperimentConfig& config, const CliOptions& cli);
void cmd_scaling_experiment(const ExperimentConfig& config, const CliOptions& cli);
void cmd_optimize_walk(const ExperimentConfig& config, const CliOptions& cli);

/// Dispatches one subcommand by name; throws ConfigError for bad configs and
/// std::runtime_error for runtime failures.
void run_command(const std::string& command, const CliOptions& cli);

}  // namespace graphmcmc
