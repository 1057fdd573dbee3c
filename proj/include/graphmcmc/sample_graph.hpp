#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "graphmcmc/metric.hpp"
#include "graphmcmc/targets.hpp"

namespace graphmcmc {

/// Edge cost between nodes with log densities la, lb at metric distance d:
/// kappa/(1+d) when |la-lb| < kappa, else |la-lb|.
double edge_cost(double log_density_a, double log_density_b, double distance,
                 double kappa);

/// Spanning tree over approximate posterior samples, with per-node cached
/// log densities and all-pairs walk distances. Immutable after build; safe
/// for shared concurrent reads.
class SampleGraph {
 public:
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& log_densities() const { return log_densities_; }
  const Metric& metric() const { return metric_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  double kappa() const { return kappa_; }
  int radius() const { return radius_; }
  int size() const { return static_cast<int>(nodes_.rows()); }
  int dim() const { return static_cast<int>(nodes_.cols()); }
  double total_cost() const { return total_cost_; }

  int graph_distance(int i, int j) const;
  /// Nodes within walk distance r of j, ascending index; always contains j.
  std::vector<int> ball(int j, int r) const;
  int ball_size(int j, int r) const;
  /// Index of the metric-nearest node to theta; ties go to the lowest index.
  /// Exact linear scan over all nodes.
  int nearest_node(const Eigen::VectorXd& theta) const;

  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }

  void set_radius(int r);

  friend SampleGraph build_mst(const Eigen::MatrixXd& beta, const Target& target,
                               const Metric& metric, double kappa, int radius,
                               bool use_kruskal);
  friend SampleGraph single_node_graph(const Eigen::MatrixXd& beta,
                                       const Target& target, const Metric& metric);

 private:
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd log_densities_;
  Metric metric_;
  std::vector<std::pair<int, int>> edges_;
  double kappa_ = 1.0;
  int radius_ = 3;
  double total_cost_ = 0.0;
  std::vector<std::vector<int>> adjacency_;
  // Row-major m*m walk distances from BFS on the tree.
  std::vector<int> dist_;

  void finalize();
};

/// Minimum spanning tree under edge_cost via Prim's algorithm (Kruskal's when
/// use_kruskal is set; both give the same total cost). Cost ties break by
/// lexicographic (i,j). Throws if any node has log density -inf.
SampleGraph build_mst(const Eigen::MatrixXd& beta, const Target& target,
                      const Metric& metric, double kappa, int radius = 3,
                      bool use_kruskal = false);

/// Edgeless graph on a single node, for degenerate setups.
SampleGraph single_node_graph(const Eigen::MatrixXd& beta, const Target& target,
                              const Metric& metric);

/// Expected squared jump distance of the kappa/r ball walk over the tree,
/// using min(1, ratio) acceptance with ball-size-corrected densities.
double esjd_estimate(const Eigen::MatrixXd& beta, const Target& target,
                     const Metric& metric, double kappa, int r);

struct EsjdEntry {
  double kappa;
  int r;
  double esjd;
};

struct TuneResult {
  double kappa;
  int r;
  std::vector<EsjdEntry> table;
};

/// Grid search maximizing esjd_estimate; ties prefer smaller kappa, then
/// smaller r.
TuneResult tune_kappa_r(const Eigen::MatrixXd& beta, const Target& target,
                        const Metric& metric, const std::vector<double>& kappa_grid,
                        const std::vector<int>& r_grid);

/// Median of all pairwise metric distances among the rows of beta.
double median_pairwise_distance(const Eigen::MatrixXd& beta, const Metric& metric);

}  // namespace graphmcmc
