#include "graphmcmc/walk_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

#include "graphmcmc/linalg.hpp"

namespace graphmcmc {

namespace {

bool strongly_connected(int m, const std::vector<std::vector<int>>& out,
                        const std::vector<std::vector<int>>& in) {
  for (const auto* adj : {&out, &in}) {
    std::vector<bool> seen(m, false);
    std::deque<int> queue{0};
    seen[0] = true;
    int count = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : (*adj)[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          queue.push_back(v);
        }
      }
    }
    if (count != m) return false;
  }
  return true;
}

struct SupportIndex {
  std::vector<std::vector<int>> out;  // out-neighbors excluding self
  std::vector<bool> has_self;
  Eigen::MatrixXi mask;

  explicit SupportIndex(const WalkProblem& p)
      : out(p.m), has_self(p.m, false), mask(Eigen::MatrixXi::Zero(p.m, p.m)) {
    for (auto [i, j] : p.support) {
      if (i == j)
        has_self[i] = true;
      else if (mask(i, j) == 0)
        out[i].push_back(j);
      mask(i, j) = 1;
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
  }
};

bool feasible(const Eigen::MatrixXd& P, const WalkProblem& problem,
              const Eigen::MatrixXi& mask) {
  const int m = problem.m;
  for (int i = 0; i < m; ++i) {
    double row = 0.0;
    for (int j = 0; j < m; ++j) {
      if (P(i, j) < 0.0) return false;
      if (mask(i, j) == 0 && P(i, j) != 0.0) return false;
      row += P(i, j);
    }
    if (std::abs(row - 1.0) > 1e-8) return false;
  }
  Eigen::VectorXd resid = P.transpose() * problem.pi - problem.pi;
  return resid.cwiseAbs().maxCoeff() <= 1e-6;
}

}  // namespace

void WalkProblem::validate() const {
  if (m < 1) throw std::invalid_argument("walk: m must be >= 1");
  if (pi.size() != m) throw std::invalid_argument("walk: pi has wrong length");
  if (pi.minCoeff() <= 0.0)
    throw std::invalid_argument("walk: pi must be strictly positive");
  if (std::abs(pi.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("walk: pi must sum to 1");
  std::vector<std::vector<int>> out(m), in(m);
  for (auto [i, j] : support) {
    if (i < 0 || i >= m || j < 0 || j >= m)
      throw std::invalid_argument("walk: support index out of range");
    if (i != j) {
      out[i].push_back(j);
      in[j].push_back(i);
    }
  }
  if (!strongly_connected(m, out, in))
    throw std::invalid_argument("walk: support is not strongly connected");
}

WalkProblem walk_problem_from_graph(const SampleGraph& graph,
                                    double distance_exclusion) {
  WalkProblem p;
  p.m = graph.size();
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i < p.m; ++i) edges.insert({i, i});
  for (auto [a, b] : graph.edges()) {
    double d = graph.metric().distance(graph.nodes().row(a).transpose(),
                                       graph.nodes().row(b).transpose());
    if (d < distance_exclusion) continue;
    edges.insert({a, b});
    edges.insert({b, a});
  }
  p.support.assign(edges.begin(), edges.end());
  // pi proportional to the node densities, floored to keep it positive.
  Eigen::VectorXd logp = graph.log_densities();
  double lse = logsumexp(logp);
  p.pi.resize(p.m);
  for (int j = 0; j < p.m; ++j)
    p.pi[j] = std::max(std::exp(logp[j] - lse), 1e-300);
  p.pi /= p.pi.sum();
  p.validate();
  return p;
}

double walk_objective(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  Eigen::MatrixXd A = P - Eigen::VectorXd::Ones(P.rows()) * pi.transpose();
  return A.bdcSvd().singularValues()(0);
}

TransitionMatrix metropolized_reference(const WalkProblem& problem) {
  problem.validate();
  const int m = problem.m;
  SupportIndex idx(problem);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const auto& nbrs = idx.out[i];
    double leftover = 1.0;
    if (!nbrs.empty()) {
      double deg_i = static_cast<double>(nbrs.size());
      for (int j : nbrs) {
        double deg_j = static_cast<double>(idx.out[j].size());
        double acc = std::min(1.0, problem.pi[j] * deg_i /
                                       (problem.pi[i] * std::max(deg_j, 1.0)));
        P(i, j) = acc / deg_i;
        leftover -= P(i, j);
      }
    }
    P(i, i) = std::max(leftover, 0.0);
  }
  TransitionMatrix out;
  out.P = P;
  out.objective = walk_objective(P, problem.pi);
  return out;
}

TransitionMatrix optimize_transition_matrix(const WalkProblem& problem,
                                            double tolerance,
                                            int max_iterations) {
  problem.validate();
  const int m = problem.m;
  SupportIndex idx(problem);
  const Eigen::VectorXd& pi = problem.pi;

  TransitionMatrix best = metropolized_reference(problem);
  const Eigen::MatrixXd P_ref = best.P;

  // Lazy mixtures (1-a) P_ref + a I are feasible for every a in [0, 1): the
  // identity is stationary for any pi and self-loops are in the support.
  {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    for (int k = 1; k < 200; ++k) {
      double a = k / 200.0;
      Eigen::MatrixXd P = (1.0 - a) * P_ref + a * I;
      double obj = walk_objective(P, pi);
      if (obj < best.objective) {
        best.P = P;
        best.objective = obj;
      }
    }
  }

  // Complete support admits the rank-one optimum exactly.
  if (static_cast<Eigen::Index>(problem.m) * problem.m ==
      static_cast<Eigen::Index>(idx.mask.cast<long>().sum())) {
    Eigen::MatrixXd P = Eigen::VectorXd::Ones(m) * pi.transpose();
    double obj = walk_objective(P, pi);
    if (obj < best.objective) {
      best.P = P;
      best.objective = obj;
    }
  }

  // Projected subgradient on the support entries. Variables x are the
  // entries of P on the support; equality constraints are the row sums and
  // stationarity; nonnegativity is restored by clipping inside alternating
  // projections.
  std::vector<std::pair<int, int>> entries;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (idx.mask(i, j)) entries.emplace_back(i, j);
  const int nnz = static_cast<int>(entries.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * m, nnz);
  Eigen::VectorXd b(2 * m);
  for (int i = 0; i < m; ++i) b[i] = 1.0;
  for (int j = 0; j < m; ++j) b[m + j] = pi[j];
  for (int e = 0; e < nnz; ++e) {
    auto [i, j] = entries[e];
    M(i, e) = 1.0;
    M(m + j, e) = pi[i];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> MMt(
      (M * M.transpose()).eval());
  auto project_affine = [&](Eigen::VectorXd& x) {
    x -= M.transpose() * MMt.solve(M * x - b);
  };
  auto to_matrix = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
    for (int e = 0; e < nnz; ++e) P(entries[e].first, entries[e].second) = x[e];
    return P;
  };

  Eigen::VectorXd x(nnz);
  for (int e = 0; e < nnz; ++e)
    x[e] = best.P(entries[e].first, entries[e].second);
  double last_improvement = 0.0;
  int last_improve_iter = -1;
  int it = 0;
  for (; it < max_iterations; ++it) {
    Eigen::MatrixXd A = to_matrix(x) -
                        Eigen::VectorXd::Ones(m) * pi.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double sigma = svd.singularValues()(0);
    Eigen::VectorXd u = svd.matrixU().col(0);
    Eigen::VectorXd v = svd.matrixV().col(0);
    double step = best.objective / std::sqrt(static_cast<double>(it + 1));
    for (int e = 0; e < nnz; ++e) {
      auto [i, j] = entries[e];
      x[e] -= step * u[i] * v[j];
    }
    // Alternate affine projection and clipping back to the nonnegative cone.
    for (int pass = 0; pass < 60; ++pass) {
      project_affine(x);
      bool clipped = false;
      for (int e = 0; e < nnz; ++e) {
        if (x[e] < 0.0) {
          x[e] = 0.0;
          clipped = true;
        }
      }
      if (!clipped) break;
    }
    project_affine(x);
    for (int e = 0; e < nnz; ++e) x[e] = std::max(x[e], 0.0);
    Eigen::MatrixXd P = to_matrix(x);
    // Renormalize rows exactly; keeps nonnegativity, may perturb
    // stationarity, so the feasibility check below decides.
    for (int i = 0; i < m; ++i) {
      double row = P.row(i).sum();
      if (row > 0.0) P.row(i) /= row;
    }
    if (feasible(P, problem, idx.mask)) {
      double obj = walk_objective(P, pi);
      if (obj < best.objective - 1e-15) {
        last_improvement = best.objective - obj;
        last_improve_iter = it;
        best.P = P;
        best.objective = obj;
      }
    }
    (void)sigma;
  }
  best.iterations = it;
  // Still improving by more than the tolerance on the final iteration means
  // the iteration budget, not the problem, stopped us.
  best.converged =
      !(last_improve_iter == max_iterations - 1 && last_improvement > tolerance);
  return best;
}

int weighted_ball_draw(const Eigen::MatrixXd& P, int j, Rng& rng) {
  const Eigen::Index m = P.cols();
  double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    acc += P(j, k);
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(m - 1);
}

}  // namespace graphmcmc
