#include "graphmcmc/sample_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace graphmcmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Canonical (low, high) form so tie-breaking is order-independent.
std::pair<int, int> canon(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};
}  // namespace

double edge_cost(double log_density_a, double log_density_b, double distance,
                 double kappa) {
  double gap = std::abs(log_density_a - log_density_b);
  if (gap < kappa) return kappa / (1.0 + distance);
  return gap;
}

int SampleGraph::graph_distance(int i, int j) const {
  return dist_[static_cast<std::size_t>(i) * nodes_.rows() + j];
}

std::vector<int> SampleGraph::ball(int j, int r) const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k)
    if (graph_distance(j, k) <= r) out.push_back(k);
  return out;
}

int SampleGraph::ball_size(int j, int r) const {
  int c = 0;
  for (int k = 0; k < size(); ++k)
    if (graph_distance(j, k) <= r) ++c;
  return c;
}

int SampleGraph::nearest_node(const Eigen::VectorXd& theta) const {
  const int m = size();
  int best = 0;
  if (metric_.is_euclidean()) {
    const Eigen::Index p = nodes_.cols();
    double best_d2 = kInf;
    for (int l = 0; l < m; ++l) {
      double d2 = 0.0;
      for (Eigen::Index k = 0; k < p; ++k) {
        double diff = nodes_(l, k) - theta[k];
        d2 += diff * diff;
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = l;
      }
    }
    return best;
  }
  double best_d = kInf;
  for (int l = 0; l < m; ++l) {
    double d = metric_.distance(nodes_.row(l).transpose(), theta);
    if (d < best_d) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

void SampleGraph::set_radius(int r) {
  if (r < 0) throw std::invalid_argument("graph: radius must be >= 0");
  radius_ = r;
}

void SampleGraph::finalize() {
  const int m = size();
  adjacency_.assign(m, {});
  for (auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  dist_.assign(static_cast<std::size_t>(m) * m, -1);
  std::deque<int> queue;
  for (int s = 0; s < m; ++s) {
    int* row = dist_.data() + static_cast<std::size_t>(s) * m;
    row[s] = 0;
    queue.clear();
    queue.push_back(s);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : adjacency_[u]) {
        if (row[v] < 0) {
          row[v] = row[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (int v = 0; v < m; ++v)
      if (row[v] < 0) throw std::logic_error("graph: tree is not connected");
  }
}

SampleGraph build_mst(const Eigen::MatrixXd& beta, const Target& target,
                      const Metric& metric, double kappa, int radius,
                      bool use_kruskal) {
  const int m = static_cast<int>(beta.rows());
  if (m < 2) throw std::invalid_argument("build_mst: need at least 2 nodes");
  if (!(kappa > 0.0)) throw std::invalid_argument("build_mst: kappa must be positive");

  SampleGraph g;
  g.nodes_ = beta;
  g.metric_ = metric;
  g.kappa_ = kappa;
  g.radius_ = radius;
  g.log_densities_.resize(m);
  for (int j = 0; j < m; ++j) {
    double ld = target.log_kernel(beta.row(j).transpose());
    if (!std::isfinite(ld))
      throw std::runtime_error("build_mst: node " + std::to_string(j) +
                               " has log density -inf");
    g.log_densities_[j] = ld;
  }

  // Dense pairwise costs; kappa only switches between the cached parts.
  Eigen::MatrixXd cost(m, m);
  for (int i = 0; i < m; ++i) {
    cost(i, i) = 0.0;
    for (int j = 0; j < i; ++j) {
      double d = metric.distance(beta.row(i).transpose(), beta.row(j).transpose());
      double c = edge_cost(g.log_densities_[i], g.log_densities_[j], d, kappa);
      cost(i, j) = cost(j, i) = c;
    }
  }

  g.edges_.clear();
  g.total_cost_ = 0.0;
  if (use_kruskal) {
    std::vector<std::pair<int, int>> all;
    all.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) all.emplace_back(i, j);
    std::sort(all.begin(), all.end(), [&](const auto& e1, const auto& e2) {
      double c1 = cost(e1.first, e1.second), c2 = cost(e2.first, e2.second);
      if (c1 != c2) return c1 < c2;
      return e1 < e2;
    });
    DisjointSet ds(m);
    for (const auto& e : all) {
      if (ds.unite(e.first, e.second)) {
        g.edges_.push_back(e);
        g.total_cost_ += cost(e.first, e.second);
        if (static_cast<int>(g.edges_.size()) == m - 1) break;
      }
    }
  } else {
    // Prim's, dense O(m^2); ties resolved toward the lexicographically
    // smallest canonical edge.
    std::vector<bool> in_tree(m, false);
    std::vector<double> best_cost(m, kInf);
    std::vector<int> best_from(m, -1);
    in_tree[0] = true;
    for (int v = 1; v < m; ++v) {
      best_cost[v] = cost(0, v);
      best_from[v] = 0;
    }
    for (int step = 1; step < m; ++step) {
      int pick = -1;
      for (int v = 0; v < m; ++v) {
        if (in_tree[v]) continue;
        if (pick < 0 || best_cost[v] < best_cost[pick] ||
            (best_cost[v] == best_cost[pick] &&
             canon(best_from[v], v) < canon(best_from[pick], pick)))
          pick = v;
      }
      in_tree[pick] = true;
      g.edges_.push_back(canon(best_from[pick], pick));
      g.total_cost_ += best_cost[pick];
      for (int v = 0; v < m; ++v) {
        if (in_tree[v]) continue;
        double c = cost(pick, v);
        if (c < best_cost[v] ||
            (c == best_cost[v] && canon(pick, v) < canon(best_from[v], v))) {
          best_cost[v] = c;
          best_from[v] = pick;
        }
      }
    }
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.finalize();
  return g;
}

SampleGraph single_node_graph(const Eigen::MatrixXd& beta, const Target& target,
                              const Metric& metric) {
  if (beta.rows() != 1)
    throw std::invalid_argument("single_node_graph: expected exactly 1 row");
  SampleGraph g;
  g.nodes_ = beta;
  g.metric_ = metric;
  g.log_densities_.resize(1);
  g.log_densities_[0] = target.log_kernel(beta.row(0).transpose());
  g.finalize();
  return g;
}

namespace {
double esjd_on_graph(const SampleGraph& g, int r) {
  const int m = g.size();
  std::vector<double> log_ball(m);
  for (int j = 0; j < m; ++j)
    log_ball[j] = std::log(static_cast<double>(g.ball_size(j, r)));
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    std::vector<int> Bj = g.ball(j, r);
    double inner = 0.0;
    for (int i : Bj) {
      double log_ratio = (g.log_densities()[i] - log_ball[i]) -
                         (g.log_densities()[j] - log_ball[j]);
      double acc = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
      double d = g.metric().distance(g.nodes().row(i).transpose(),
                                     g.nodes().row(j).transpose());
      inner += acc * d * d;
    }
    total += inner / static_cast<double>(Bj.size());
  }
  return total / static_cast<double>(m);
}
}  // namespace

double esjd_estimate(const Eigen::MatrixXd& beta, const Target& target,
                     const Metric& metric, double kappa, int r) {
  SampleGraph g = build_mst(beta, target, metric, kappa, r);
  return esjd_on_graph(g, r);
}

TuneResult tune_kappa_r(const Eigen::MatrixXd& beta, const Target& target,
                        const Metric& metric, const std::vector<double>& kappa_grid,
                        const std::vector<int>& r_grid) {
  if (kappa_grid.empty() || r_grid.empty())
    throw std::invalid_argument("tune_kappa_r: empty grid");
  std::vector<double> kappas = kappa_grid;
  std::vector<int> rs = r_grid;
  std::sort(kappas.begin(), kappas.end());
  std::sort(rs.begin(), rs.end());
  TuneResult out;
  double best = -kInf;
  for (double kappa : kappas) {
    SampleGraph g = build_mst(beta, target, metric, kappa, rs.front());
    for (int r : rs) {
      double val = esjd_on_graph(g, r);
      out.table.push_back({kappa, r, val});
      if (val > best) {
        best = val;
        out.kappa = kappa;
        out.r = r;
      }
    }
  }
  return out;
}

double median_pairwise_distance(const Eigen::MatrixXd& beta, const Metric& metric) {
  const int m = static_cast<int>(beta.rows());
  if (m < 2) throw std::invalid_argument("median_pairwise_distance: need >= 2 rows");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      d.push_back(metric.distance(beta.row(i).transpose(), beta.row(j).transpose()));
  std::sort(d.begin(), d.end());
  std::size_t k = d.size() / 2;
  if (d.size() % 2 == 1) return d[k];
  return 0.5 * (d[k - 1] + d[k]);
}

}  // namespace graphmcmc
