#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "doctest.h"
#include "graphmcmc/jump.hpp"
#include "graphmcmc/metric.hpp"
#include "graphmcmc/rng.hpp"
#include "graphmcmc/sample_graph.hpp"
#include "graphmcmc/targets.hpp"
#include "graphmcmc/walk_optimizer.hpp"

using namespace graphmcmc;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

GmmSpec toy_spec() {
  GmmSpec spec;
  spec.weights = {0.6, 0.4};
  Eigen::VectorXd m1(2), m2(2);
  m1 << 0, 0;
  m2 << 0, 6;
  spec.means = {m1, m2};
  Eigen::MatrixXd c1(2, 2), c2(2, 2);
  c1 << 1, 0.9, 0.9, 1;
  c2 << 1, -0.9, -0.9, 1;
  spec.covariances = {c1, c2};
  return spec;
}

SampleGraph toy_graph(const GmmTarget& target, int m, int radius, Rng& rng) {
  Eigen::MatrixXd beta(m, 2);
  for (int i = 0; i < m; ++i) beta.row(i) = target.sample(rng).transpose();
  return build_mst(beta, target, Metric(), 1.0, radius);
}

// Recompute the acceptance ratio of a uniform-ball proposal from scratch.
double expected_ratio(const SampleGraph& graph, const GmmTarget& target,
                      const Eigen::VectorXd& theta, const JumpProposal& prop) {
  int j = prop.source, i = prop.proposed;
  double xi_rev =
      graph.metric().distance(theta, graph.nodes().row(j).transpose());
  double p = static_cast<double>(theta.size());
  return target.log_kernel(prop.theta_star) - target.log_kernel(theta) +
         std::log(double(graph.ball_size(j, graph.radius()))) -
         std::log(double(graph.ball_size(i, graph.radius()))) +
         std::log(prop.b_fwd - prop.a_fwd) - std::log(prop.b_rev - prop.a_rev) +
         (p - 1.0) * (std::log(std::abs(prop.xi)) - std::log(xi_rev));
}

}  // namespace

TEST_CASE("direction vector") {
  Metric metric;
  Rng rng(1);
  Eigen::VectorXd theta(2), beta(2);
  theta << 3, 0;
  beta << 1, 0;
  Eigen::VectorXd v = direction_vector(theta, beta, metric, rng);
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-14));

  // Antisymmetry: reflecting theta through beta flips the direction.
  Eigen::VectorXd mirrored = 2 * beta - theta;
  Eigen::VectorXd w = direction_vector(mirrored, beta, metric, rng);
  CHECK(w[0] == doctest::Approx(-v[0]).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(-v[1]).epsilon(1e-14));

  // Mahalanobis normalization.
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.5, 0.5, 1.0;
  Metric mah(S);
  theta << 1.3, -0.4;
  beta << 0.2, 0.8;
  Eigen::VectorXd u = direction_vector(theta, beta, mah, rng);
  CHECK(mah.norm(u) == doctest::Approx(1.0).epsilon(1e-12));

  // Degenerate case: a random unit vector, reproducible from the stream.
  Rng r1(7), r2(7);
  Eigen::VectorXd d1 = direction_vector(beta, beta, metric, r1);
  Eigen::VectorXd d2 = direction_vector(beta, beta, metric, r2);
  CHECK(metric.norm(d1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((d1.array() == d2.array()).all());
}

TEST_CASE("segment bounds requires the node to own its own cell") {
  GmmTarget target(toy_spec());
  Metric metric;
  Eigen::MatrixXd beta(2, 2);
  beta << 1, 1, 1, 1;  // duplicate nodes: node 1 never wins the projection
  SampleGraph graph = build_mst(beta, target, metric, 1.0, 1);
  Eigen::VectorXd v(2);
  v << 1, 0;
  CHECK_THROWS(segment_bounds(graph, 1, v, 2.0, 1e-8));
}

TEST_CASE("proposal internals are mutually consistent") {
  GmmTarget target(toy_spec());
  Rng rng(314);
  SampleGraph graph = toy_graph(target, 40, 2, rng);
  JumpOptions opts;
  opts.l = default_truncation(graph);

  int finite_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Eigen::VectorXd theta = target.sample(rng);
    JumpProposal prop = propose_jump(graph, target, theta, opts, rng);
    REQUIRE(prop.source == graph.nearest_node(theta));
    if (prop.log_accept_ratio == -kInf) continue;
    finite_seen += 1;

    // theta_star sits on the proposed ray at offset xi.
    Eigen::VectorXd expect_star =
        graph.nodes().row(prop.proposed).transpose() + prop.xi * prop.v;
    CHECK((prop.theta_star - expect_star).norm() < 1e-12);
    CHECK(graph.nearest_node(prop.theta_star) == prop.proposed);
    CHECK(prop.xi >= prop.a_fwd);
    CHECK(prop.xi < prop.b_fwd);
    CHECK(prop.a_fwd >= -opts.l - 1e-12);
    CHECK(prop.b_fwd <= opts.l + 1e-12);
    double xi_rev = graph.metric().distance(
        theta, graph.nodes().row(prop.source).transpose());
    CHECK(xi_rev > prop.a_rev);
    CHECK(xi_rev < prop.b_rev);

    CHECK(prop.log_accept_ratio ==
          doctest::Approx(expected_ratio(graph, target, theta, prop))
              .epsilon(1e-9));
  }
  CHECK(finite_seen > 200);
}

TEST_CASE("accepted proposals have antisymmetric ratios") {
  // Rebuilding the reverse proposal's ingredients from theta_star must give
  // the negated log ratio: jumps are reversible move pairs.
  GmmTarget target(toy_spec());
  Rng rng(159);
  SampleGraph graph = toy_graph(target, 25, 2, rng);
  JumpOptions opts;
  opts.l = default_truncation(graph);
  const double tol = opts.bisect_tol_factor * opts.l;

  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 60; ++trial) {
    Eigen::VectorXd theta = target.sample(rng);
    JumpProposal prop = propose_jump(graph, target, theta, opts, rng);
    if (prop.log_accept_ratio == -kInf) continue;
    checked += 1;

    int i = prop.proposed, j = prop.source;
    double sign = prop.xi >= 0 ? 1.0 : -1.0;
    Eigen::VectorXd v_rev = sign * prop.v;
    double xi_rev = graph.metric().distance(
        theta, graph.nodes().row(j).transpose());

    auto [af, bf] = segment_bounds(graph, j, v_rev, opts.l, tol);
    auto [ar, br] = segment_bounds(graph, i, v_rev, opts.l, tol);
    double p = static_cast<double>(theta.size());
    double reverse =
        target.log_kernel(theta) - target.log_kernel(prop.theta_star) +
        std::log(double(graph.ball_size(i, graph.radius()))) -
        std::log(double(graph.ball_size(j, graph.radius()))) +
        std::log(bf - af) - std::log(br - ar) +
        (p - 1.0) * (std::log(xi_rev) - std::log(std::abs(prop.xi)));
    CHECK(std::abs(prop.log_accept_ratio + reverse) < 1e-6);
  }
  CHECK(checked == 60);
}

TEST_CASE("jump step accepts onto the proposed cell and rejects in place") {
  GmmTarget target(toy_spec());
  Rng rng(2718);
  SampleGraph graph = toy_graph(target, 30, 2, rng);
  JumpOptions opts;
  opts.l = default_truncation(graph);

  Eigen::VectorXd theta = target.sample(rng);
  int accepted = 0, rejected = 0;
  for (int t = 0; t < 2000; ++t) {
    JumpProposal record;
    Eigen::VectorXd next = jump_step(graph, target, theta, opts, rng, &record);
    CHECK(!std::isnan(record.log_accept_ratio));
    if (record.accepted) {
      accepted += 1;
      CHECK((next.array() == record.theta_star.array()).all());
      CHECK(graph.nearest_node(next) == record.proposed);
    } else {
      rejected += 1;
      CHECK((next.array() == theta.array()).all());
    }
    theta = next;
  }
  CHECK(accepted > 100);
  CHECK(rejected > 100);
}

TEST_CASE("single node graph gives matching forward and reverse segments") {
  GmmSpec spec;
  spec.weights = {1.0};
  spec.means = {Eigen::VectorXd::Zero(2)};
  spec.covariances = {Eigen::MatrixXd::Identity(2, 2)};
  GmmTarget target(spec);
  Eigen::MatrixXd beta(1, 2);
  beta << 0, 0;
  SampleGraph graph = single_node_graph(beta, target, Metric());
  JumpOptions opts;
  opts.l = 3.0;

  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd theta(2);
    theta << rng.normal(), rng.normal();
    JumpProposal prop = propose_jump(graph, target, theta, opts, rng);
    REQUIRE(prop.source == 0);
    REQUIRE(prop.proposed == 0);
    if (prop.log_accept_ratio == -kInf) continue;
    // Identity proposal: both segments are the same truncated interval, and
    // the ratio reduces to the density difference plus the radial factor.
    CHECK(prop.a_fwd == doctest::Approx(prop.a_rev));
    CHECK(prop.b_fwd == doctest::Approx(prop.b_rev));
    double xi_rev = theta.norm();
    double expect = target.log_kernel(prop.theta_star) -
                    target.log_kernel(theta) +
                    (std::log(std::abs(prop.xi)) - std::log(xi_rev));
    CHECK(prop.log_accept_ratio == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("walk matrix proposals use the matrix row") {
  GmmTarget target(toy_spec());
  Rng rng(4242);
  SampleGraph graph = toy_graph(target, 20, 1, rng);
  WalkProblem problem = walk_problem_from_graph(graph);
  TransitionMatrix walk = metropolized_reference(problem);

  JumpOptions opts;
  opts.l = default_truncation(graph);
  opts.walk_matrix = &walk.P;

  int finite_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd theta = target.sample(rng);
    JumpProposal prop = propose_jump(graph, target, theta, opts, rng);
    int j = prop.source, i = prop.proposed;
    CHECK(walk.P(j, i) > 0.0);
    if (prop.log_accept_ratio == -kInf) continue;
    finite_seen += 1;

    double xi_rev = graph.metric().distance(
        theta, graph.nodes().row(j).transpose());
    double p = static_cast<double>(theta.size());
    double expect =
        target.log_kernel(prop.theta_star) - target.log_kernel(theta) +
        std::log(walk.P(i, j)) - std::log(walk.P(j, i)) +
        std::log(prop.b_fwd - prop.a_fwd) - std::log(prop.b_rev - prop.a_rev) +
        (p - 1.0) * (std::log(std::abs(prop.xi)) - std::log(xi_rev));
    CHECK(prop.log_accept_ratio == doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(finite_seen > 100);
}

TEST_CASE("default truncation is twice the median spacing") {
  GmmTarget target(toy_spec());
  Rng rng(5);
  Eigen::MatrixXd beta(12, 2);
  for (int i = 0; i < 12; ++i) beta.row(i) = target.sample(rng).transpose();
  SampleGraph graph = build_mst(beta, target, Metric(), 1.0, 2);
  CHECK(default_truncation(graph) ==
        doctest::Approx(2.0 * median_pairwise_distance(beta, graph.metric())));
}

TEST_CASE("jump-only chain stays in equilibrium") {
  // Chains started from exact draws must keep the target's mode weights;
  // this is the small-scale version of the stationarity acceptance check.
  GmmTarget target(toy_spec());
  Rng rng(808);
  SampleGraph graph = toy_graph(target, 30, 2, rng);
  JumpOptions opts;
  opts.l = default_truncation(graph);

  const int chains = 300, steps = 20;
  long above = 0;
  double sum1 = 0.0, sum2 = 0.0;
  for (int c = 0; c < chains; ++c) {
    Rng stream = Rng(900).substream(c);
    Eigen::VectorXd theta = target.sample(stream);
    for (int t = 0; t < steps; ++t) {
      theta = jump_step(graph, target, theta, opts, stream);
      if (theta[1] > 3.0) above += 1;
      sum1 += theta[0];
      sum2 += theta[1];
    }
  }
  double n = double(chains) * steps;
  CHECK(std::abs(above / n - 0.40026997960632604) < 0.05);
  CHECK(std::abs(sum1 / n - 0.0) < 0.08);
  CHECK(std::abs(sum2 / n - 2.4) < 0.25);
}
