#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "graphmcmc/jump.hpp"
#include "graphmcmc/metric.hpp"
#include "graphmcmc/rng.hpp"
#include "graphmcmc/sample_graph.hpp"
#include "graphmcmc/targets.hpp"

using namespace graphmcmc;

namespace {

GmmTarget standard_normal_2d() {
  GmmSpec spec;
  spec.weights = {1.0};
  spec.means = {Eigen::VectorXd::Zero(2)};
  spec.covariances = {Eigen::MatrixXd::Identity(2, 2)};
  return GmmTarget(spec);
}

using EdgeSet = std::vector<std::pair<int, int>>;

EdgeSet canonical(EdgeSet edges) {
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  return edges;
}

// Decode a Prufer sequence into the labeled tree's edge list.
EdgeSet decode_prufer(const std::vector<int>& seq, int m) {
  std::vector<int> deg(m, 1);
  for (int v : seq) deg[v] += 1;
  EdgeSet edges;
  std::vector<bool> used(m, false);
  for (int v : seq) {
    int leaf = -1;
    for (int u = 0; u < m; ++u)
      if (deg[u] == 1 && !used[u]) {
        leaf = u;
        break;
      }
    edges.push_back({leaf, v});
    used[leaf] = true;
    deg[v] -= 1;
  }
  int a = -1, b = -1;
  for (int u = 0; u < m; ++u)
    if (!used[u] && deg[u] == 1) (a < 0 ? a : b) = u;
  edges.push_back({a, b});
  return edges;
}

// Exhaustive minimum spanning tree over all m^(m-2) labeled trees.
std::pair<double, EdgeSet> exhaustive_mst(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  long total = 1;
  for (int i = 0; i < m - 2; ++i) total *= m;
  double best = std::numeric_limits<double>::infinity();
  EdgeSet best_edges;
  for (long code = 0; code < total; ++code) {
    std::vector<int> seq(m - 2);
    long c = code;
    for (int i = 0; i < m - 2; ++i) {
      seq[i] = static_cast<int>(c % m);
      c /= m;
    }
    EdgeSet edges = decode_prufer(seq, m);
    double s = 0.0;
    for (auto& e : edges) s += cost(e.first, e.second);
    if (s < best) {
      best = s;
      best_edges = canonical(edges);
    }
  }
  return {best, best_edges};
}

struct HalfPlaneTarget : Target {
  int dim() const override { return 2; }

 protected:
  double log_kernel_impl(const Eigen::VectorXd& x) const override {
    if (x[0] < 0)
      return -std::numeric_limits<double>::infinity();
    return -0.5 * x.squaredNorm();
  }
};

}  // namespace

TEST_CASE("edge cost branches") {
  // Density gap below kappa: cost kappa/(1+distance), so larger distances
  // are preferred; otherwise the gap itself.
  CHECK(edge_cost(-1.0, -1.5, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(edge_cost(-1.5, -1.0, 3.0, 1.0) == doctest::Approx(0.25));
  CHECK(edge_cost(0.0, -2.0, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(edge_cost(0.0, -1.0, 3.0, 1.0) == doctest::Approx(1.0));  // tie: gap
}

TEST_CASE("mst matches exhaustive enumeration") {
  GmmTarget target = standard_normal_2d();
  Metric metric;
  Rng rng(2024);
  const double kappas[] = {0.5, 1.0, 2.0};
  for (int inst = 0; inst < 20; ++inst) {
    int m = 4 + inst % 3;
    double kappa = kappas[inst % 3];
    Eigen::MatrixXd beta(m, 2);
    for (int i = 0; i < m; ++i) {
      beta(i, 0) = 2.0 * rng.normal();
      beta(i, 1) = 2.0 * rng.normal();
    }
    Eigen::MatrixXd cost(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (i == j) {
          cost(i, j) = 0.0;
          continue;
        }
        double d = metric.distance(beta.row(i).transpose(), beta.row(j).transpose());
        cost(i, j) = edge_cost(target.log_kernel(beta.row(i).transpose()),
                               target.log_kernel(beta.row(j).transpose()), d, kappa);
      }
    auto [best, best_edges] = exhaustive_mst(cost);

    SampleGraph prim = build_mst(beta, target, metric, kappa, 1, false);
    SampleGraph kruskal = build_mst(beta, target, metric, kappa, 1, true);
    CHECK(prim.total_cost() == doctest::Approx(best).epsilon(1e-9));
    CHECK(kruskal.total_cost() == doctest::Approx(best).epsilon(1e-9));
    CHECK(canonical(prim.edges()) == best_edges);
    CHECK(canonical(kruskal.edges()) == best_edges);
    CHECK(prim.edges().size() == static_cast<std::size_t>(m - 1));
  }
}

TEST_CASE("nearest node matches a brute force scan") {
  GmmTarget target = standard_normal_2d();
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.3, 0.3, 1.0;
  Rng rng(55);
  Eigen::MatrixXd beta(30, 2);
  for (int i = 0; i < 30; ++i) {
    beta(i, 0) = rng.normal();
    beta(i, 1) = rng.normal();
  }
  for (const Metric& metric : {Metric(), Metric(S)}) {
    SampleGraph graph = build_mst(beta, target, metric, 1.0, 2);
    for (int q = 0; q < 50; ++q) {
      Eigen::VectorXd x(2);
      x << rng.uniform(-3, 3), rng.uniform(-3, 3);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 30; ++i) {
        double d = metric.distance(x, beta.row(i).transpose());
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      CHECK(graph.nearest_node(x) == best);
    }
  }
}

TEST_CASE("balls and graph distances") {
  GmmTarget target = standard_normal_2d();
  Metric metric;
  Rng rng(66);
  Eigen::MatrixXd beta(7, 2);
  for (int i = 0; i < 7; ++i) {
    beta(i, 0) = rng.normal();
    beta(i, 1) = rng.normal();
  }
  SampleGraph graph = build_mst(beta, target, metric, 1.0, 2);

  for (int i = 0; i < 7; ++i) {
    CHECK(graph.graph_distance(i, i) == 0);
    for (int j = 0; j < 7; ++j)
      CHECK(graph.graph_distance(i, j) == graph.graph_distance(j, i));
  }

  for (int j = 0; j < 7; ++j)
    for (int r = 0; r <= 3; ++r) {
      std::vector<int> ball = graph.ball(j, r);
      CHECK(graph.ball_size(j, r) == static_cast<int>(ball.size()));
      CHECK(std::is_sorted(ball.begin(), ball.end()));
      CHECK(std::find(ball.begin(), ball.end(), j) != ball.end());
      for (int i = 0; i < 7; ++i) {
        bool inside = std::find(ball.begin(), ball.end(), i) != ball.end();
        CHECK(inside == (graph.graph_distance(j, i) <= r));
      }
    }
  CHECK(graph.ball_size(0, 6) == 7);  // tree diameter is at most m-1
  CHECK(graph.ball(2, 0) == std::vector<int>{2});

  graph.set_radius(2);
  CHECK(graph.radius() == 2);
  CHECK_THROWS_AS(graph.set_radius(-1), std::invalid_argument);
}

TEST_CASE("two-node cell boundary found by bisection") {
  GmmTarget target = standard_normal_2d();
  Metric metric;
  const double l = 5.0, tol = 1e-8 * l;
  for (double d : {0.5, 2.0, 3.7}) {
    Eigen::MatrixXd beta(2, 2);
    beta << 0, 0, d, 0;
    SampleGraph graph = build_mst(beta, target, metric, 1.0, 1);
    Eigen::VectorXd v(2);
    v << 1, 0;
    // From node 0 toward node 1 the cell ends at the midpoint bisector.
    auto [a0, b0] = segment_bounds(graph, 0, v, l, tol);
    CHECK(std::abs(b0 - d / 2.0) <= 1e-6);
    CHECK(a0 == doctest::Approx(-l));
    // From node 1 the same direction leaves the cell only backwards.
    auto [a1, b1] = segment_bounds(graph, 1, v, l, tol);
    CHECK(b1 == doctest::Approx(l));
    CHECK(std::abs(a1 + d / 2.0) <= 1e-6);
    // Perpendicular to the separating axis the cell never ends.
    Eigen::VectorXd u(2);
    u << 0, 1;
    auto [a2, b2] = segment_bounds(graph, 0, u, l, tol);
    CHECK(a2 == doctest::Approx(-l));
    CHECK(b2 == doctest::Approx(l));
  }
}

TEST_CASE("segment probing never leaves the cell") {
  // Voronoi cells are convex, so {xi: nearest(beta_i + xi v) = i} restricted
  // to [-l, l] is an interval; probe interior points for violations.
  GmmTarget target = standard_normal_2d();
  Eigen::MatrixXd S(2, 2);
  S << 1.5, -0.4, -0.4, 0.8;
  Rng rng(91);
  for (const Metric& metric : {Metric(), Metric(S)}) {
    Eigen::MatrixXd beta(12, 2);
    for (int i = 0; i < 12; ++i) {
      beta(i, 0) = rng.normal();
      beta(i, 1) = rng.normal();
    }
    SampleGraph graph = build_mst(beta, target, metric, 1.0, 2);
    const double l = 4.0;
    for (int trial = 0; trial < 20; ++trial) {
      int i = static_cast<int>(rng.uniform_int(12));
      Eigen::VectorXd dir(2);
      dir << rng.normal(), rng.normal();
      Eigen::VectorXd v = metric.normalize(dir);
      auto [a, b] = segment_bounds(graph, i, v, l, 1e-8 * l);
      REQUIRE(a <= 0.0);
      REQUIRE(b >= 0.0);
      for (int k = 1; k < 100; ++k) {
        double xi = a + (b - a) * k / 100.0;
        Eigen::VectorXd x = beta.row(i).transpose() + xi * v;
        CHECK(graph.nearest_node(x) == i);
      }
    }
  }
}

TEST_CASE("single node graph") {
  GmmTarget target = standard_normal_2d();
  Metric metric;
  Eigen::MatrixXd beta(1, 2);
  beta << 0.5, -0.25;
  SampleGraph graph = single_node_graph(beta, target, metric);
  CHECK(graph.size() == 1);
  CHECK(graph.edges().empty());
  CHECK(graph.graph_distance(0, 0) == 0);
  CHECK(graph.ball(0, 0) == std::vector<int>{0});
  Eigen::VectorXd x(2);
  x << 100, -40;
  CHECK(graph.nearest_node(x) == 0);

  Eigen::VectorXd v(2);
  v << 1, 0;
  auto [a, b] = segment_bounds(graph, 0, v, 2.5, 1e-8 * 2.5);
  CHECK(a == doctest::Approx(-2.5));
  CHECK(b == doctest::Approx(2.5));
}

TEST_CASE("median pairwise distance") {
  Metric metric;
  Eigen::MatrixXd three(3, 2);
  three << 0, 0, 1, 0, 4, 0;
  CHECK(median_pairwise_distance(three, metric) == doctest::Approx(3.0));
  Eigen::MatrixXd four(4, 2);
  four << 0, 0, 1, 0, 2, 0, 4, 0;
  // Distances {1,2,4,1,3,2}; median of the sorted list is (2+2)/2.
  CHECK(median_pairwise_distance(four, metric) == doctest::Approx(2.0));
}

TEST_CASE("graph build rejects bad input") {
  GmmTarget target = standard_normal_2d();
  Metric metric;
  Eigen::MatrixXd one(1, 2);
  one << 0, 0;
  CHECK_THROWS(build_mst(one, target, metric, 1.0, 1));

  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 1, 0;
  CHECK_THROWS(build_mst(two, target, metric, 0.0, 1));
  CHECK_THROWS(build_mst(two, target, metric, -1.0, 1));

  HalfPlaneTarget half;
  Eigen::MatrixXd bad(2, 2);
  bad << -1, 0, 1, 0;  // first node has zero density
  CHECK_THROWS(build_mst(bad, half, metric, 1.0, 1));
}

TEST_CASE("kappa and radius tuning table") {
  GmmTarget target = standard_normal_2d();
  Metric metric;
  Rng rng(12);
  Eigen::MatrixXd beta(10, 2);
  for (int i = 0; i < 10; ++i) {
    beta(i, 0) = rng.normal();
    beta(i, 1) = rng.normal();
  }
  std::vector<double> kappa_grid = {0.5, 1.0};
  std::vector<int> r_grid = {1, 2};
  TuneResult res = tune_kappa_r(beta, target, metric, kappa_grid, r_grid);
  REQUIRE(res.table.size() == 4);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : res.table) {
    CHECK(e.esjd >= 0.0);
    CHECK(e.esjd == doctest::Approx(esjd_estimate(beta, target, metric, e.kappa,
                                                  e.r)).epsilon(1e-12));
    best = std::max(best, e.esjd);
  }
  CHECK(esjd_estimate(beta, target, metric, res.kappa, res.r) ==
        doctest::Approx(best).epsilon(1e-12));

  // m = 2: every radius already covers the whole graph, so the esjd ties
  // and the smaller radius wins.
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 1.5, 0;
  TuneResult tie = tune_kappa_r(two, target, metric, {1.0}, {1, 2, 3});
  CHECK(tie.r == 1);
}
