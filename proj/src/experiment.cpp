#include "graphmcmc/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "graphmcmc/config.hpp"
#include "graphmcmc/csv.hpp"
#include "graphmcmc/diagnostics.hpp"
#include "graphmcmc/jump.hpp"
#include "graphmcmc/metric.hpp"
#include "graphmcmc/rng.hpp"
#include "graphmcmc/walk_optimizer.hpp"

namespace graphmcmc {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string resolve_path(const std::string& path, const std::string& out_dir) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(out_dir) / p).string();
}

std::string artifact_path(const CliOptions& cli, const std::string& name) {
  return resolve_path(name, cli.out_dir);
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + out_dir + ": " +
                             ec.message());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
}

std::vector<long> to_longs(const std::vector<double>& xs, const std::string& what) {
  std::vector<long> out;
  out.reserve(xs.size());
  for (double x : xs) {
    long v = static_cast<long>(std::llround(x));
    if (std::abs(x - static_cast<double>(v)) > 1e-9) {
      throw ConfigError(what + ": expected integer values");
    }
    out.push_back(v);
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& xs) {
  return Eigen::Map<const Eigen::VectorXd>(xs.data(),
                                           static_cast<long>(xs.size()));
}

// weights, mean_1.., then either sigma_k (isotropic standard deviation) or
// cov_k (full row-major matrix, or one value for an isotropic variance).
GmmSpec parse_gmm_spec(const IniFile& ini, const std::string& section,
                       bool sigma_form) {
  GmmSpec spec;
  spec.weights = ini.require_doubles(section, "weights");
  const int k = static_cast<int>(spec.weights.size());
  for (int c = 0; c < k; ++c) {
    spec.means.push_back(
        to_vector(ini.require_doubles(section, "mean_" + std::to_string(c + 1))));
  }
  const int p = static_cast<int>(spec.means[0].size());
  for (int c = 0; c < k; ++c) {
    const std::string id = std::to_string(c + 1);
    if (sigma_form) {
      double sigma = ini.require_double(section, "sigma_" + id);
      if (sigma <= 0.0) {
        throw ConfigError(section + ": sigma_" + id + " must be positive");
      }
      spec.covariances.push_back(sigma * sigma *
                                 Eigen::MatrixXd::Identity(p, p));
    } else {
      auto cov = ini.require_doubles(section, "cov_" + id);
      if (cov.size() == 1) {
        if (cov[0] <= 0.0) {
          throw ConfigError(section + ": cov_" + id + " must be positive");
        }
        spec.covariances.push_back(cov[0] * Eigen::MatrixXd::Identity(p, p));
      } else if (static_cast<int>(cov.size()) == p * p) {
        Eigen::MatrixXd M(p, p);
        for (int a = 0; a < p; ++a) {
          for (int b = 0; b < p; ++b) M(a, b) = cov[static_cast<size_t>(a) * p + b];
        }
        spec.covariances.push_back(M);
      } else {
        throw ConfigError(section + ": cov_" + id + " needs 1 or " +
                          std::to_string(p * p) + " values");
      }
    }
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(section + ": " + e.what());
  }
  return spec;
}

Eigen::VectorXd model_default_point(const TargetBundle& bundle) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(bundle.target->dim());
  if (bundle.kind == "lgm") {
    const int n = bundle.model->n();
    theta(n) = 1.0;
    theta(n + 1) = 0.25;
    theta(n + 2) = 2.0;
  }
  return theta;
}

Metric make_metric(const std::string& kind, const Eigen::MatrixXd& beta,
                   bool* fell_back) {
  *fell_back = false;
  if (kind == "euclidean") return Metric();
  return Metric::from_samples(beta, 1e-6, fell_back);
}

void write_diagnostics_files(const CliOptions& cli, const DiagnosticsReport& rep,
                             const std::vector<std::string>& names) {
  json j;
  j["iterations"] = rep.iterations;
  j["burn_in"] = rep.burn_in;
  j["stored"] = rep.stored;
  j["max_lag"] = rep.max_lag;
  j["esjd"] = rep.esjd;
  j["jump_acceptance"] = rep.jump_acceptance;
  j["baseline_acceptance"] = rep.baseline_acceptance;
  j["coordinates"] = names;
  j["ess"] = rep.ess;
  j["ess_per_iter"] = rep.ess_per_iter;
  write_json_file(artifact_path(cli, "diagnostics.json"), j);

  if (rep.autocorr.empty()) return;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd ac(rep.max_lag + 1, static_cast<long>(rep.autocorr.size()) + 1);
  for (int lag = 0; lag <= rep.max_lag; ++lag) {
    ac(lag, 0) = lag;
    for (size_t c = 0; c < rep.autocorr.size(); ++c) {
      ac(lag, static_cast<long>(c) + 1) =
          rep.autocorr[c].size() > lag ? rep.autocorr[c](lag) : nan;
    }
  }
  std::vector<std::string> header{"lag"};
  header.insert(header.end(), names.begin(), names.end());
  write_matrix_csv(artifact_path(cli, "autocorr.csv"), ac, header);
}

void write_transcript(const std::string& path,
                      const std::vector<JumpProposal>& transcript) {
  std::ostringstream out;
  for (const auto& t : transcript) {
    json j;
    j["source"] = t.source;
    j["proposed"] = t.proposed;
    j["xi"] = t.xi;
    j["a_fwd"] = t.a_fwd;
    j["b_fwd"] = t.b_fwd;
    j["a_rev"] = t.a_rev;
    j["b_rev"] = t.b_rev;
    j["log_accept_ratio"] = t.log_accept_ratio;
    j["accepted"] = t.accepted;
    j["theta_star"] = std::vector<double>(
        t.theta_star.data(), t.theta_star.data() + t.theta_star.size());
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

void write_walk_files(const GraphBlock& block, const CliOptions& cli,
                      const SampleGraph& graph) {
  WalkProblem problem = walk_problem_from_graph(graph, block.distance_exclusion);
  TransitionMatrix reference = metropolized_reference(problem);
  TransitionMatrix best = optimize_transition_matrix(problem, block.walk_tolerance,
                                                     block.walk_max_iterations);
  write_matrix_csv(artifact_path(cli, "walk_P.csv"), best.P, {});
  json meta;
  meta["m"] = problem.m;
  meta["objective"] = best.objective;
  meta["reference_objective"] = reference.objective;
  meta["iterations"] = best.iterations;
  meta["converged"] = best.converged;
  meta["distance_exclusion"] = block.distance_exclusion;
  write_json_file(artifact_path(cli, "walk_meta.json"), meta);
}

json tallies_json(const KernelTallies& t) {
  json j;
  j["jump_attempts"] = t.jump_attempts;
  j["jump_accepts"] = t.jump_accepts;
  j["baseline_attempts"] = t.baseline_attempts;
  j["baseline_accepts"] = t.baseline_accepts;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path,
                                        const CliOptions& cli) {
  IniFile ini = IniFile::load(path);
  ExperimentConfig config;

  if (ini.has_section("target")) {
    auto& t = config.target;
    t.present = true;
    ini.touch_section("target");
    t.kind = ini.require("target", "kind");
    if (t.kind == "gmm") {
      t.gmm = parse_gmm_spec(ini, "target", false);
    } else if (t.kind == "banana" || t.kind == "lgm") {
      t.data_file = ini.get("target", "data").value_or(t.kind + "_data.csv");
    } else {
      throw ConfigError("target: unknown kind '" + t.kind + "'");
    }
  }

  if (ini.has_section("simulate")) {
    auto& s = config.simulate;
    s.present = true;
    ini.touch_section("simulate");
    s.n = ini.get_long("simulate", "n", s.n);
    if (s.n < 1) throw ConfigError("simulate: n must be at least 1");
    s.seed = static_cast<std::uint64_t>(
        ini.get_long("simulate", "seed", static_cast<long>(s.seed)));
    if (auto tt = ini.get_doubles("simulate", "theta_true")) {
      if (tt->size() != 2) {
        throw ConfigError("simulate: theta_true needs exactly 2 values");
      }
      s.theta_true = Eigen::Vector2d((*tt)[0], (*tt)[1]);
    }
    s.tau = ini.get_double("simulate", "tau", s.tau);
    s.h = ini.get_double("simulate", "h", s.h);
    s.r = ini.get_double("simulate", "r", s.r);
    if (s.tau <= 0 || s.h <= 0 || s.r <= 0) {
      throw ConfigError("simulate: tau, h and r must be positive");
    }
  }

  if (ini.has_section("samples")) {
    auto& s = config.samples;
    s.present = true;
    ini.touch_section("samples");
    s.source = ini.require("samples", "source");
    s.seed = static_cast<std::uint64_t>(
        ini.get_long("samples", "seed", static_cast<long>(s.seed)));
    if (s.source == "csv") {
      s.file = ini.require("samples", "file");
    } else if (s.source == "mixture") {
      s.m = ini.require_long("samples", "m");
      s.mixture = parse_gmm_spec(ini, "samples", true);
    } else if (s.source == "baseline_subsample") {
      s.m = ini.require_long("samples", "m");
      s.iterations = ini.require_long("samples", "iterations");
      s.burn_in = ini.get_long("samples", "burn_in", 0);
      s.stride = ini.get_long("samples", "stride", 1);
      if (s.stride < 1) throw ConfigError("samples: stride must be at least 1");
      if (s.burn_in < 0 || s.iterations <= s.burn_in) {
        throw ConfigError("samples: iterations must exceed burn_in");
      }
    } else {
      throw ConfigError("samples: unknown source '" + s.source + "'");
    }
    if (s.source != "csv" && s.m < 1) {
      throw ConfigError("samples: m must be at least 1");
    }
  }

  if (ini.has_section("graph")) {
    auto& g = config.graph;
    g.present = true;
    ini.touch_section("graph");
    g.metric = ini.get("graph", "metric").value_or(g.metric);
    if (g.metric != "euclidean" && g.metric != "mahalanobis") {
      throw ConfigError("graph: unknown metric '" + g.metric + "'");
    }
    g.kappa = ini.get_double("graph", "kappa", g.kappa);
    g.r = static_cast<int>(ini.get_long("graph", "r", g.r));
    if (auto kg = ini.get_doubles("graph", "kappa_grid")) g.kappa_grid = *kg;
    if (auto rg = ini.get_doubles("graph", "r_grid")) {
      for (long v : to_longs(*rg, "graph: r_grid")) {
        g.r_grid.push_back(static_cast<int>(v));
      }
    }
    g.l = ini.get_double("graph", "l", g.l);
    g.l_factor = ini.get_double("graph", "l_factor", g.l_factor);
    g.walk_optimize = ini.get_bool("graph", "walk_optimize", g.walk_optimize);
    g.distance_exclusion =
        ini.get_double("graph", "distance_exclusion", g.distance_exclusion);
    g.walk_tolerance = ini.get_double("graph", "walk_tolerance", g.walk_tolerance);
    g.walk_max_iterations = static_cast<int>(
        ini.get_long("graph", "walk_max_iterations", g.walk_max_iterations));
    if (g.kappa <= 0) throw ConfigError("graph: kappa must be positive");
    if (g.r < 1) throw ConfigError("graph: r must be at least 1");
    if (g.l < 0) throw ConfigError("graph: l must be nonnegative");
    if (g.l_factor <= 0) throw ConfigError("graph: l_factor must be positive");
    for (double kappa : g.kappa_grid) {
      if (kappa <= 0) throw ConfigError("graph: kappa_grid must be positive");
    }
    for (int r : g.r_grid) {
      if (r < 1) throw ConfigError("graph: r_grid entries must be at least 1");
    }
  }

  if (ini.has_section("run")) {
    auto& r = config.run;
    r.present = true;
    ini.touch_section("run");
    r.w = ini.get_double("run", "w", r.w);
    r.iterations = ini.require_long("run", "iterations");
    r.burn_in = ini.get_long("run", "burn_in", r.burn_in);
    r.thinning = ini.get_long("run", "thinning", r.thinning);
    r.kernel = ini.get("run", "kernel").value_or(r.kernel);
    if (r.kernel != "rwm_gaussian" && r.kernel != "rwm_uniform" &&
        r.kernel != "gibbs") {
      throw ConfigError("run: unknown kernel '" + r.kernel + "'");
    }
    r.step_size = ini.get_double("run", "step_size", r.step_size);
    r.init = ini.get("run", "init").value_or(r.init);
    if (auto rec = ini.get_doubles("run", "record")) {
      for (long v : to_longs(*rec, "run: record")) {
        r.record.push_back(static_cast<int>(v));
      }
    }
    r.seed = static_cast<std::uint64_t>(
        ini.get_long("run", "seed", static_cast<long>(r.seed)));
    r.stream_id = static_cast<std::uint64_t>(
        ini.get_long("run", "stream_id", static_cast<long>(r.stream_id)));
    if (r.w < 0.0 || r.w >= 1.0) throw ConfigError("run: w must be in [0, 1)");
    if (r.iterations < 1) throw ConfigError("run: iterations must be at least 1");
    if (r.burn_in < 0 || r.burn_in >= r.iterations) {
      throw ConfigError("run: burn_in must be in [0, iterations)");
    }
    if (r.thinning < 1) throw ConfigError("run: thinning must be at least 1");
    if (r.step_size <= 0) throw ConfigError("run: step_size must be positive");
  }

  if (ini.has_section("scaling")) {
    auto& s = config.scaling;
    s.present = true;
    ini.touch_section("scaling");
    if (auto nl = ini.get_doubles("scaling", "n_list")) {
      s.n_list = to_longs(*nl, "scaling: n_list");
    }
    if (auto ml = ini.get_doubles("scaling", "m_list")) {
      s.m_list = to_longs(*ml, "scaling: m_list");
    }
    s.iterations = ini.get_long("scaling", "iterations", s.iterations);
    s.w = ini.get_double("scaling", "w", s.w);
    s.r = static_cast<int>(ini.get_long("scaling", "r", s.r));
    s.kappa = ini.get_double("scaling", "kappa", s.kappa);
    s.replicates = ini.get_long("scaling", "replicates", s.replicates);
    s.pilot_iterations =
        ini.get_long("scaling", "pilot_iterations", s.pilot_iterations);
    s.pilot_burn_in = ini.get_long("scaling", "pilot_burn_in", s.pilot_burn_in);
    s.step_size = ini.get_double("scaling", "step_size", s.step_size);
    s.tau = ini.get_double("scaling", "tau", s.tau);
    s.h = ini.get_double("scaling", "h", s.h);
    s.data_r = ini.get_double("scaling", "data_r", s.data_r);
    s.seed = static_cast<std::uint64_t>(
        ini.get_long("scaling", "seed", static_cast<long>(s.seed)));
    if (s.n_list.empty() || s.m_list.empty()) {
      throw ConfigError("scaling: n_list and m_list must be nonempty");
    }
    for (long n : s.n_list) {
      if (n < 2) throw ConfigError("scaling: n_list entries must be at least 2");
    }
    for (long m : s.m_list) {
      if (m < 2) throw ConfigError("scaling: m_list entries must be at least 2");
    }
    if (s.iterations < 1) throw ConfigError("scaling: iterations must be at least 1");
    if (s.w <= 0.0 || s.w >= 1.0) throw ConfigError("scaling: w must be in (0, 1)");
    if (s.r < 1) throw ConfigError("scaling: r must be at least 1");
    if (s.kappa <= 0) throw ConfigError("scaling: kappa must be positive");
    if (s.replicates < 1) throw ConfigError("scaling: replicates must be at least 1");
    if (s.pilot_burn_in < 0 || s.pilot_iterations <= s.pilot_burn_in) {
      throw ConfigError("scaling: pilot_iterations must exceed pilot_burn_in");
    }
    if (s.step_size <= 0) throw ConfigError("scaling: step_size must be positive");
    if (s.tau <= 0 || s.h <= 0 || s.data_r <= 0) {
      throw ConfigError("scaling: tau, h and data_r must be positive");
    }
  }

  if (ini.has_section("diagnose")) {
    auto& d = config.diagnose;
    d.present = true;
    ini.touch_section("diagnose");
    d.file = ini.require("diagnose", "file");
    d.max_lag = static_cast<int>(ini.get_long("diagnose", "max_lag", d.max_lag));
    if (d.max_lag == 0 || d.max_lag < -1) {
      throw ConfigError("diagnose: max_lag must be positive (or -1 for the default)");
    }
  }

  ini.finish();

  if (cli.seed) {
    config.simulate.seed = splitmix64(*cli.seed + 1);
    config.samples.seed = splitmix64(*cli.seed + 2);
    config.run.seed = splitmix64(*cli.seed + 3);
    config.scaling.seed = splitmix64(*cli.seed + 4);
  }
  return config;
}

TargetBundle make_target(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.target.present) throw ConfigError("missing [target] section");
  TargetBundle bundle;
  bundle.kind = config.target.kind;
  if (bundle.kind == "gmm") {
    bundle.target = std::make_unique<GmmTarget>(config.target.gmm);
    return bundle;
  }
  const std::string path = resolve_path(config.target.data_file, cli.out_dir);
  Eigen::MatrixXd data;
  try {
    data = read_matrix_csv(path);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("cannot read target data: ") + e.what() +
                             " (run the simulate command first, or point "
                             "[target] data at an existing file)");
  }
  if (bundle.kind == "banana") {
    if (data.cols() != 1) {
      throw std::runtime_error("banana data must be a single column of y values");
    }
    bundle.target = std::make_unique<BananaTarget>(data.col(0));
  } else {
    if (data.cols() != 2) {
      throw std::runtime_error("count data must have two columns (t, y)");
    }
    auto model = std::make_shared<const LgmModel>(data.col(0), data.col(1));
    bundle.model = model;
    bundle.target = std::make_unique<LgmTarget>(model);
  }
  return bundle;
}

Eigen::MatrixXd acquire_samples(const ExperimentConfig& config,
                                const CliOptions& cli,
                                const TargetBundle& bundle) {
  if (!config.samples.present) throw ConfigError("missing [samples] section");
  const auto& s = config.samples;
  const int dim = bundle.target->dim();

  if (s.source == "csv") {
    Eigen::MatrixXd beta = read_matrix_csv(resolve_path(s.file, cli.out_dir));
    if (static_cast<int>(beta.cols()) != dim) {
      throw std::runtime_error(
          "approximate samples have " + std::to_string(beta.cols()) +
          " columns but the target dimension is " + std::to_string(dim));
    }
    return beta;
  }

  if (s.source == "mixture") {
    if (static_cast<int>(s.mixture.means[0].size()) != dim) {
      throw ConfigError("samples: mixture dimension does not match the target");
    }
    GmmTarget proposal(s.mixture);
    Rng rng(s.seed);
    Eigen::MatrixXd beta(s.m, dim);
    for (long k = 0; k < s.m; ++k) {
      beta.row(k) = proposal.sample(rng).transpose();
    }
    return beta;
  }

  // baseline_subsample: a thinned pilot run of the run-block kernel.
  if (!config.run.present) {
    throw ConfigError(
        "samples: the baseline_subsample source takes its kernel from the "
        "[run] section, which is missing");
  }
  auto kernel = make_kernel(config.run.kernel, config.run.step_size, bundle);
  RunConfig rc;
  rc.w = 0.0;
  rc.n_iterations = s.iterations;
  rc.burn_in = s.burn_in;
  rc.thinning = s.stride;
  rc.seed = s.seed;
  RunResult pilot =
      run_chain(*bundle.target, nullptr, *kernel, rc, model_default_point(bundle));
  if (pilot.samples.rows() < s.m) {
    throw std::runtime_error("pilot run stored " +
                             std::to_string(pilot.samples.rows()) +
                             " draws, fewer than m = " + std::to_string(s.m));
  }
  return pilot.samples.topRows(s.m);
}

std::unique_ptr<BaselineKernel> make_kernel(const std::string& kind,
                                            double step_size,
                                            const TargetBundle& bundle) {
  if (kind == "rwm_gaussian") {
    return std::make_unique<RwmKernel>(RwmConfig{RwmProposal::gaussian, step_size});
  }
  if (kind == "rwm_uniform") {
    return std::make_unique<RwmKernel>(
        RwmConfig{RwmProposal::uniform_box, step_size});
  }
  if (kind == "gibbs") {
    if (!bundle.model) {
      throw ConfigError("run: the gibbs kernel requires the lgm target");
    }
    return std::make_unique<LgmGibbsKernel>(bundle.model, step_size);
  }
  throw ConfigError("run: unknown kernel '" + kind + "'");
}

Eigen::VectorXd initial_point(const std::string& init, const TargetBundle& bundle,
                              const SampleGraph* graph) {
  const int dim = bundle.target->dim();
  if (init.empty()) {
    if (graph != nullptr) return graph->nodes().row(0).transpose();
    return model_default_point(bundle);
  }
  if (init == "zeros") return Eigen::VectorXd::Zero(dim);
  if (init == "model_default") return model_default_point(bundle);
  if (init == "node0") {
    if (graph == nullptr) {
      throw ConfigError("run: init = node0 requires a graph (w > 0)");
    }
    return graph->nodes().row(0).transpose();
  }
  std::vector<double> values;
  try {
    values = parse_double_list(init, "run: init");
  } catch (const std::exception& e) {
    throw ConfigError(std::string("run: init must be zeros, node0, "
                                  "model_default, or coordinates (") +
                      e.what() + ")");
  }
  if (static_cast<int>(values.size()) != dim) {
    throw ConfigError("run: init needs " + std::to_string(dim) + " coordinates");
  }
  return to_vector(values);
}

std::vector<std::string> coordinate_names(const std::string& kind, int dim,
                                          const std::vector<int>& record) {
  std::vector<std::string> all(static_cast<size_t>(dim));
  if (kind == "lgm" && dim >= 3) {
    const int n = dim - 3;
    for (int i = 0; i < n; ++i) all[i] = "z_" + std::to_string(i);
    all[n] = "tau";
    all[n + 1] = "h";
    all[n + 2] = "r";
  } else {
    for (int i = 0; i < dim; ++i) all[i] = "theta_" + std::to_string(i);
  }
  if (record.empty()) return all;
  std::vector<std::string> out;
  out.reserve(record.size());
  for (int idx : record) out.push_back(all.at(static_cast<size_t>(idx)));
  return out;
}

GraphArtifacts load_graph_artifacts(const ExperimentConfig& config,
                                    const CliOptions& cli,
                                    const TargetBundle& bundle) {
  (void)config;
  const std::string beta_path = artifact_path(cli, "beta.csv");
  const std::string meta_path = artifact_path(cli, "graph_meta.json");
  if (!fs::exists(beta_path) || !fs::exists(meta_path)) {
    throw std::runtime_error("no graph artifacts in " + cli.out_dir +
                             "; run the build-graph command first");
  }
  Eigen::MatrixXd beta = read_matrix_csv(beta_path);
  json meta = read_json_file(meta_path);
  const double kappa = meta.at("kappa").get<double>();
  const int r = meta.at("r").get<int>();
  const std::string metric_kind = meta.at("metric").get<std::string>();
  bool fell_back = false;
  Metric metric = make_metric(metric_kind, beta, &fell_back);

  GraphArtifacts art;
  art.graph = build_mst(beta, *bundle.target, metric, kappa, r);
  art.l = meta.at("l").get<double>();
  const double stored_cost = meta.at("total_cost").get<double>();
  if (std::abs(art.graph.total_cost() - stored_cost) >
      1e-6 * (1.0 + std::abs(stored_cost))) {
    throw std::runtime_error(
        "graph artifacts do not match this config (total cost differs); "
        "rerun the build-graph command");
  }
  if (meta.value("walk_optimize", false)) {
    art.walk_matrix = read_matrix_csv(artifact_path(cli, "walk_P.csv"));
    if (art.walk_matrix.rows() != art.graph.size() ||
        art.walk_matrix.cols() != art.graph.size()) {
      throw std::runtime_error("walk matrix size does not match the graph");
    }
    art.has_walk_matrix = true;
  }
  return art;
}

void cmd_simulate(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.target.present) throw ConfigError("missing [target] section");
  if (!config.simulate.present) throw ConfigError("missing [simulate] section");
  if (config.target.kind == "gmm") {
    throw ConfigError("simulate: the gmm target has no data to simulate");
  }
  ensure_out_dir(cli.out_dir);
  Rng rng(config.simulate.seed);
  const std::string path = resolve_path(config.target.data_file, cli.out_dir);
  if (config.target.kind == "banana") {
    Eigen::VectorXd y = simulate_banana_data(static_cast<int>(config.simulate.n),
                                             config.simulate.theta_true, rng);
    write_matrix_csv(path, y, {"y"});
  } else {
    auto [t, y] =
        simulate_lgm_data(static_cast<int>(config.simulate.n), config.simulate.tau,
                          config.simulate.h, config.simulate.r, rng);
    Eigen::MatrixXd data(t.size(), 2);
    data.col(0) = t;
    data.col(1) = y;
    write_matrix_csv(path, data, {"t", "y"});
  }
}

void cmd_build_graph(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.graph.present) throw ConfigError("missing [graph] section");
  ensure_out_dir(cli.out_dir);
  TargetBundle bundle = make_target(config, cli);
  Eigen::MatrixXd beta = acquire_samples(config, cli, bundle);
  if (beta.rows() < 2) {
    throw std::runtime_error("need at least 2 approximate samples to build a graph");
  }

  bool fell_back = false;
  Metric metric = make_metric(config.graph.metric, beta, &fell_back);

  double kappa = config.graph.kappa;
  int r = config.graph.r;
  bool tuned = false;
  std::vector<EsjdEntry> table;
  if (!config.graph.kappa_grid.empty() || !config.graph.r_grid.empty()) {
    std::vector<double> kappa_grid = config.graph.kappa_grid.empty()
                                         ? std::vector<double>{kappa}
                                         : config.graph.kappa_grid;
    std::vector<int> r_grid =
        config.graph.r_grid.empty() ? std::vector<int>{r} : config.graph.r_grid;
    TuneResult tune = tune_kappa_r(beta, *bundle.target, metric, kappa_grid, r_grid);
    kappa = tune.kappa;
    r = tune.r;
    table = tune.table;
    tuned = true;
  }

  SampleGraph graph = build_mst(beta, *bundle.target, metric, kappa, r);
  const double l = config.graph.l > 0.0
                       ? config.graph.l
                       : config.graph.l_factor *
                             median_pairwise_distance(beta, metric);
  if (!(l > 0.0)) {
    throw std::runtime_error(
        "segment half-length came out nonpositive (coincident samples?); "
        "set l explicitly");
  }

  write_matrix_csv(artifact_path(cli, "beta.csv"), beta,
                   coordinate_names(bundle.kind, static_cast<int>(beta.cols()), {}));

  Eigen::MatrixXd edges(static_cast<long>(graph.edges().size()), 3);
  const Eigen::VectorXd& ld = graph.log_densities();
  for (size_t e = 0; e < graph.edges().size(); ++e) {
    const auto [i, j] = graph.edges()[e];
    const double d = metric.distance(beta.row(i).transpose(), beta.row(j).transpose());
    edges(static_cast<long>(e), 0) = i;
    edges(static_cast<long>(e), 1) = j;
    edges(static_cast<long>(e), 2) = edge_cost(ld(i), ld(j), d, kappa);
  }
  write_matrix_csv(artifact_path(cli, "edges.csv"), edges, {"i", "j", "cost"});

  if (tuned) {
    Eigen::MatrixXd t(static_cast<long>(table.size()), 4);
    for (size_t k = 0; k < table.size(); ++k) {
      t(static_cast<long>(k), 0) = table[k].kappa;
      t(static_cast<long>(k), 1) = table[k].r;
      t(static_cast<long>(k), 2) = table[k].esjd;
      t(static_cast<long>(k), 3) =
          (table[k].kappa == kappa && table[k].r == r) ? 1.0 : 0.0;
    }
    write_matrix_csv(artifact_path(cli, "esjd_table.csv"), t,
                     {"kappa", "r", "esjd", "chosen"});
  }

  json meta;
  meta["m"] = graph.size();
  meta["p"] = graph.dim();
  meta["kappa"] = kappa;
  meta["r"] = r;
  meta["metric"] = config.graph.metric;
  meta["metric_fell_back"] = fell_back;
  meta["l"] = l;
  meta["total_cost"] = graph.total_cost();
  meta["tuned"] = tuned;
  meta["source"] = config.samples.source;
  meta["walk_optimize"] = config.graph.walk_optimize;
  write_json_file(artifact_path(cli, "graph_meta.json"), meta);

  if (config.graph.walk_optimize) {
    write_walk_files(config.graph, cli, graph);
  }
}

void cmd_run(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.run.present) throw ConfigError("missing [run] section");
  ensure_out_dir(cli.out_dir);
  const auto t_start = std::chrono::steady_clock::now();

  TargetBundle bundle = make_target(config, cli);
  const int dim = bundle.target->dim();
  for (int idx : config.run.record) {
    if (idx < 0 || idx >= dim) {
      throw ConfigError("run: record index " + std::to_string(idx) +
                        " out of range for dimension " + std::to_string(dim));
    }
  }

  std::optional<GraphArtifacts> art;
  if (config.run.w > 0.0) {
    art.emplace(load_graph_artifacts(config, cli, bundle));
  }
  const SampleGraph* graph = art ? &art->graph : nullptr;

  auto kernel = make_kernel(config.run.kernel, config.run.step_size, bundle);
  Eigen::VectorXd theta0 = initial_point(config.run.init, bundle, graph);

  RunConfig rc;
  rc.w = config.run.w;
  rc.n_iterations = config.run.iterations;
  rc.burn_in = config.run.burn_in;
  rc.thinning = config.run.thinning;
  rc.seed = config.run.seed;
  rc.l = art ? art->l : 0.0;
  rc.record = config.run.record;
  rc.stream_id = config.run.stream_id;

  const Eigen::MatrixXd* walk =
      (art && art->has_walk_matrix) ? &art->walk_matrix : nullptr;
  std::vector<JumpProposal> transcript;
  std::vector<JumpProposal>* transcript_ptr = cli.transcript ? &transcript : nullptr;

  RunResult result =
      run_chain(*bundle.target, graph, *kernel, rc, theta0, walk, transcript_ptr);

  const auto names = coordinate_names(bundle.kind, dim, config.run.record);
  write_matrix_csv(artifact_path(cli, "samples.csv"), result.samples, names);
  write_diagnostics_files(cli, result.diagnostics, names);
  if (cli.transcript) {
    write_transcript(artifact_path(cli, "jumps.jsonl"), transcript);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  json meta;
  meta["command"] = "run";
  meta["target"] = bundle.kind;
  meta["kernel"] = config.run.kernel;
  meta["w"] = config.run.w;
  meta["iterations"] = config.run.iterations;
  meta["burn_in"] = config.run.burn_in;
  meta["thinning"] = config.run.thinning;
  meta["step_size"] = config.run.step_size;
  meta["seed"] = config.run.seed;
  meta["stream_id"] = config.run.stream_id;
  meta["l"] = rc.l;
  meta["stored"] = result.diagnostics.stored;
  meta["burn_in_tallies"] = tallies_json(result.burn_in_tallies);
  meta["post_tallies"] = tallies_json(result.post_tallies);
  if (auto* gibbs = dynamic_cast<LgmGibbsKernel*>(kernel.get())) {
    meta["final_hr_step_size"] = gibbs->hr_step_size();
  }
  // Timing only; every other field is reproducible byte for byte.
  meta["wall_time_seconds"] = wall;
  write_json_file(artifact_path(cli, "run_meta.json"), meta);
}

void cmd_diagnose(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.diagnose.present) throw ConfigError("missing [diagnose] section");
  ensure_out_dir(cli.out_dir);
  Eigen::MatrixXd samples =
      read_matrix_csv(resolve_path(config.diagnose.file, cli.out_dir));
  KernelTallies none;
  DiagnosticsReport rep =
      diagnose(samples, none, samples.rows(), 0, config.diagnose.max_lag);
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(samples.cols()));
  for (long c = 0; c < samples.cols(); ++c) {
    names.push_back("col_" + std::to_string(c));
  }
  write_diagnostics_files(cli, rep, names);
}

namespace {

struct ScalingOutcome {
  long attempts = 0;
  long accepts = 0;
  double rate = 0.0;
};

ScalingOutcome run_scaling_replicate(const ScalingBlock& sc, long n, long m,
                                     std::uint64_t task_seed) {
  const std::uint64_t data_seed = splitmix64(task_seed ^ 0xd1b54a32d192ed03ULL);
  const std::uint64_t pilot_seed = splitmix64(task_seed ^ 0x8bb84b93962eacc9ULL);
  const std::uint64_t run_seed = splitmix64(task_seed ^ 0x2545f4914f6cdd1dULL);

  Rng data_rng(data_seed);
  auto [t, y] =
      simulate_lgm_data(static_cast<int>(n), sc.tau, sc.h, sc.data_r, data_rng);
  auto model = std::make_shared<const LgmModel>(t, y);
  LgmTarget target(model);

  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(target.dim());
  theta0(n) = 1.0;
  theta0(n + 1) = 0.25;
  theta0(n + 2) = 2.0;

  LgmGibbsKernel kernel(model, sc.step_size);
  RunConfig pilot_rc;
  pilot_rc.w = 0.0;
  pilot_rc.n_iterations = sc.pilot_iterations;
  pilot_rc.burn_in = sc.pilot_burn_in;
  pilot_rc.seed = pilot_seed;
  RunResult pilot = run_chain(target, nullptr, kernel, pilot_rc, theta0);

  const long stored = pilot.samples.rows();
  if (stored < m) {
    throw std::runtime_error("scaling pilot stored " + std::to_string(stored) +
                             " draws, fewer than m = " + std::to_string(m));
  }
  // Evenly spaced subset of the post-burn-in pilot draws.
  Eigen::MatrixXd beta(m, pilot.samples.cols());
  for (long k = 0; k < m; ++k) {
    beta.row(k) = pilot.samples.row(k * stored / m);
  }

  Metric metric;
  SampleGraph graph = build_mst(beta, target, metric, sc.kappa, sc.r);

  RunConfig rc;
  rc.w = sc.w;
  rc.n_iterations = sc.iterations;
  rc.burn_in = 0;
  rc.seed = run_seed;
  // The kernel keeps its pilot-adapted (h, r) step, frozen from here on.
  RunResult run =
      run_chain(target, &graph, kernel, rc, beta.row(0).transpose());

  const KernelTallies& tallies = run.post_tallies;
  ScalingOutcome outcome;
  outcome.attempts = tallies.jump_attempts;
  outcome.accepts = tallies.jump_accepts;
  outcome.rate = tallies.jump_attempts > 0
                     ? static_cast<double>(tallies.jump_accepts) /
                           static_cast<double>(tallies.jump_attempts)
                     : 0.0;
  return outcome;
}

}  // namespace

void cmd_scaling_experiment(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.scaling.present) throw ConfigError("missing [scaling] section");
  const ScalingBlock& sc = config.scaling;
  ensure_out_dir(cli.out_dir);

  std::vector<std::array<double, 7>> rows;
  std::vector<std::array<double, 5>> summary;
  for (long n : sc.n_list) {
    for (long m : sc.m_list) {
      double rate_sum = 0.0;
      for (long rep = 0; rep < sc.replicates; ++rep) {
        std::uint64_t task = sc.seed;
        task = splitmix64(task ^ splitmix64(static_cast<std::uint64_t>(n)));
        task = splitmix64(task ^ splitmix64(static_cast<std::uint64_t>(m) +
                                            0x9e3779b97f4a7c15ULL));
        task = splitmix64(task ^ splitmix64(static_cast<std::uint64_t>(rep) +
                                            0xbf58476d1ce4e5b9ULL));
        ScalingOutcome outcome = run_scaling_replicate(sc, n, m, task);
        rate_sum += outcome.rate;
        rows.push_back({static_cast<double>(n), static_cast<double>(n + 3),
                        static_cast<double>(m), static_cast<double>(rep),
                        static_cast<double>(outcome.attempts),
                        static_cast<double>(outcome.accepts), outcome.rate});
      }
      summary.push_back({static_cast<double>(n), static_cast<double>(n + 3),
                         static_cast<double>(m),
                         static_cast<double>(sc.replicates),
                         rate_sum / static_cast<double>(sc.replicates)});
    }
  }

  Eigen::MatrixXd rates(static_cast<long>(rows.size()), 7);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 7; ++c) rates(static_cast<long>(i), c) = rows[i][c];
  }
  write_matrix_csv(artifact_path(cli, "scaling_rates.csv"), rates,
                   {"n", "p", "m", "replicate", "jump_attempts", "jump_accepts",
                    "acceptance_rate"});

  Eigen::MatrixXd means(static_cast<long>(summary.size()), 5);
  for (size_t i = 0; i < summary.size(); ++i) {
    for (int c = 0; c < 5; ++c) means(static_cast<long>(i), c) = summary[i][c];
  }
  write_matrix_csv(artifact_path(cli, "scaling_summary.csv"), means,
                   {"n", "p", "m", "replicates", "mean_acceptance_rate"});
}

void cmd_optimize_walk(const ExperimentConfig& config, const CliOptions& cli) {
  if (!config.graph.present) throw ConfigError("missing [graph] section");
  ensure_out_dir(cli.out_dir);
  TargetBundle bundle = make_target(config, cli);
  GraphArtifacts art = load_graph_artifacts(config, cli, bundle);
  write_walk_files(config.graph, cli, art.graph);
  // Flag the artifact set so later runs pick the matrix up.
  const std::string meta_path = artifact_path(cli, "graph_meta.json");
  json meta = read_json_file(meta_path);
  meta["walk_optimize"] = true;
  write_json_file(meta_path, meta);
}

void run_command(const std::string& command, const CliOptions& cli) {
  ExperimentConfig config = ExperimentConfig::load(cli.config_path, cli);
  if (command == "simulate") {
    cmd_simulate(config, cli);
  } else if (command == "build-graph") {
    cmd_build_graph(config, cli);
  } else if (command == "run") {
    cmd_run(config, cli);
  } else if (command == "diagnose") {
    cmd_diagnose(config, cli);
  } else if (command == "scaling-experiment") {
    cmd_scaling_experiment(config, cli);
  } else if (command == "optimize-walk") {
    cmd_optimize_walk(config, cli);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
}

}  // namespace graphmcmc
