#include "graphmcmc/jump.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "graphmcmc/walk_optimizer.hpp"

namespace graphmcmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Eigen::VectorXd direction_vector(const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& beta_j,
                                 const Metric& metric, Rng& rng) {
  Eigen::VectorXd diff = theta - beta_j;
  double n = metric.norm(diff);
  if (n >= 1e-12) return diff / n;
  for (;;) {
    Eigen::VectorXd u(theta.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = rng.normal();
    double un = metric.norm(u);
    if (un > 1e-12) return u / un;
  }
}

std::pair<double, double> segment_bounds(const SampleGraph& graph, int i,
                                         const Eigen::VectorXd& v, double l,
                                         double tol) {
  if (!(l > 0.0) || !(tol > 0.0))
    throw std::invalid_argument("segment_bounds: l and tol must be positive");
  const Eigen::VectorXd beta_i = graph.nodes().row(i).transpose();
  if (graph.nearest_node(beta_i) != i)
    throw std::runtime_error("segment_bounds: node " + std::to_string(i) +
                             " does not project to itself");
  auto inside = [&](double xi) {
    return graph.nearest_node(beta_i + xi * v) == i;
  };
  // The nearest-node cell is convex, so {xi: inside} is an interval around 0.
  double b;
  if (inside(l)) {
    b = l;
  } else {
    double lo = 0.0, hi = l;  // lo inside, hi outside
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      double mid = 0.5 * (lo + hi);
      (inside(mid) ? lo : hi) = mid;
    }
    b = lo;
  }
  double a;
  if (inside(-l)) {
    a = -l;
  } else {
    double lo = -l, hi = 0.0;  // lo outside, hi inside
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      double mid = 0.5 * (lo + hi);
      (inside(mid) ? hi : lo) = mid;
    }
    a = hi;
  }
  return {a, b};
}

JumpProposal propose_jump(const SampleGraph& graph, const Target& target,
                          const Eigen::VectorXd& theta, const JumpOptions& opts,
                          Rng& rng) {
  JumpProposal prop;
  const double l = opts.l;
  const double tol = opts.bisect_tol_factor * l;
  const int j = graph.nearest_node(theta);
  prop.source = j;

  double log_sel_fwd, log_sel_rev;  // log q(i|j) and log q(j|i)
  int i;
  if (opts.walk_matrix != nullptr) {
    const Eigen::MatrixXd& P = *opts.walk_matrix;
    i = weighted_ball_draw(P, j, rng);
    log_sel_fwd = std::log(P(j, i));
    log_sel_rev = P(i, j) > 0.0 ? std::log(P(i, j)) : -kInf;
  } else {
    std::vector<int> Bj = graph.ball(j, graph.radius());
    i = Bj[rng.uniform_int(Bj.size())];
    log_sel_fwd = -std::log(static_cast<double>(Bj.size()));
    log_sel_rev = -std::log(static_cast<double>(graph.ball_size(i, graph.radius())));
  }
  prop.proposed = i;

  const Eigen::VectorXd beta_j = graph.nodes().row(j).transpose();
  const Eigen::VectorXd beta_i = graph.nodes().row(i).transpose();
  prop.v = direction_vector(theta, beta_j, graph.metric(), rng);

  auto [a_fwd, b_fwd] = segment_bounds(graph, i, prop.v, l, tol);
  prop.a_fwd = a_fwd;
  prop.b_fwd = b_fwd;
  prop.xi = rng.uniform(a_fwd, b_fwd);
  prop.theta_star = beta_i + prop.xi * prop.v;

  auto [a_rev, b_rev] = segment_bounds(graph, j, prop.v, l, tol);
  prop.a_rev = a_rev;
  prop.b_rev = b_rev;

  // Reverse move: from theta_star the chain must project to i, pick j, and
  // reach theta along the same direction within the segment at j.
  const double xi_rev = graph.metric().distance(theta, beta_j);
  bool valid = graph.nearest_node(prop.theta_star) == i &&
               xi_rev > a_rev && xi_rev < b_rev && xi_rev <= l &&
               log_sel_rev > -kInf;
  if (!valid) {
    prop.log_accept_ratio = -kInf;
    return prop;
  }
  // Radial balance term. The forward move reaches theta_star at distance
  // |xi| from beta_i while the reverse move regenerates the direction from
  // theta at distance xi_rev from beta_j; in polar coordinates around the
  // respective nodes the volume elements differ by (|xi|/xi_rev)^{p-1}, and
  // without this factor the kernel's stationary law picks up a spurious
  // 1/distance^{p-1} tilt toward the nodes.
  const auto p = theta.size();
  const double radial =
      static_cast<double>(p - 1) * (std::log(std::abs(prop.xi)) - std::log(xi_rev));
  prop.log_accept_ratio = target.log_kernel(prop.theta_star) -
                          target.log_kernel(theta) + log_sel_rev - log_sel_fwd +
                          std::log(b_fwd - a_fwd) - std::log(b_rev - a_rev) +
                          radial;
  if (std::isnan(prop.log_accept_ratio)) prop.log_accept_ratio = -kInf;
  return prop;
}

Eigen::VectorXd jump_step(const SampleGraph& graph, const Target& target,
                          const Eigen::VectorXd& theta, const JumpOptions& opts,
                          Rng& rng, JumpProposal* record) {
  JumpProposal prop = propose_jump(graph, target, theta, opts, rng);
  double alpha = prop.log_accept_ratio >= 0.0
                     ? 1.0
                     : std::exp(prop.log_accept_ratio);
  prop.accepted = rng.uniform() < alpha;
  Eigen::VectorXd out = prop.accepted ? prop.theta_star : theta;
  if (record) *record = prop;
  return out;
}

double default_truncation(const SampleGraph& graph) {
  return 2.0 * median_pairwise_distance(graph.nodes(), graph.metric());
}

}  // namespace graphmcmc
