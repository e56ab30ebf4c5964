#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qmk/sdp.hpp"
#include "qmk/states.hpp"

namespace qmk {

/// Quadratic phase-space ground cost |q1 - q2|^2 + |p1 - p2|^2.
inline double phase_space_cost(const PhasePoint& x, const PhasePoint& y) {
  return (x.q - y.q).squaredNorm() + (x.p - y.p).squaredNorm();
}

/// Discrete transport plan: nonnegative matrix whose row sums are the source
/// weights and column sums the target weights.
struct TransportPlan {
  RealMatrix matrix;
  double cost = 0.0;
};

namespace detail {

/// Transportation-simplex state over the bipartite graph of m sources and
/// n sinks. Nodes 0..m-1 are rows, m..m+n-1 are columns.
struct SimplexState {
  int m, n;
  RealMatrix cost;
  RealMatrix flow;
  std::vector<std::vector<bool>> basic;

  int node_of_col(int j) const { return m + j; }

  std::vector<std::vector<std::pair<int, int>>> adjacency() const {
    // adjacency[node] = list of (neighbor node, flat cell index)
    std::vector<std::vector<std::pair<int, int>>> adj(m + n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (basic[i][j]) {
          adj[i].push_back({node_of_col(j), i * n + j});
          adj[node_of_col(j)].push_back({i, i * n + j});
        }
      }
    }
    return adj;
  }
};

/// Northwest-corner basic feasible start; always yields m + n - 1 basic
/// cells (degenerate ones carry zero flow).
inline void northwest_corner(SimplexState& st, std::vector<double> supply,
                             std::vector<double> demand) {
  int i = 0, j = 0;
  int placed = 0;
  while (placed < st.m + st.n - 1) {
    st.basic[i][j] = true;
    const double moved = std::min(supply[i], demand[j]);
    st.flow(i, j) = moved;
    supply[i] -= moved;
    demand[j] -= moved;
    ++placed;
    if (i == st.m - 1 && j == st.n - 1) break;
    if (supply[i] <= demand[j] && i < st.m - 1) {
      ++i;
    } else {
      ++j;
    }
  }
}

/// Dual potentials u_i + v_j = c_ij on basic cells, u_0 = 0, by walking the
/// basis tree.
inline void potentials(const SimplexState& st, std::vector<double>& u,
                       std::vector<double>& v) {
  const auto adj = st.adjacency();
  std::vector<double> pot(st.m + st.n, 0.0);
  std::vector<char> seen(st.m + st.n, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    for (auto [next, cell] : adj[node]) {
      if (seen[next]) continue;
      seen[next] = 1;
      const int i = cell / st.n, j = cell % st.n;
      // u_i + v_j = c_ij
      pot[next] = st.cost(i, j) - pot[node];
      stack.push_back(next);
    }
  }
  for (int i = 0; i < st.m; ++i) u[i] = pot[i];
  for (int j = 0; j < st.n; ++j) v[j] = pot[st.m + j];
}

/// Unique path between two nodes of the basis tree, returned as the list of
/// flat cell indices along the way.
inline std::vector<int> tree_path(const SimplexState& st, int from, int to) {
  const auto adj = st.adjacency();
  std::vector<int> parent_node(st.m + st.n, -1), parent_cell(st.m + st.n, -1);
  std::vector<char> seen(st.m + st.n, 0);
  std::vector<int> queue = {from};
  seen[from] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int node = queue[head];
    if (node == to) break;
    for (auto [next, cell] : adj[node]) {
      if (seen[next]) continue;
      seen[next] = 1;
      parent_node[next] = node;
      parent_cell[next] = cell;
      queue.push_back(next);
    }
  }
  std::vector<int> cells;
  for (int node = to; node != from; node = parent_node[node]) {
    if (parent_cell[node] < 0) throw std::runtime_error("basis tree disconnected");
    cells.push_back(parent_cell[node]);
  }
  std::reverse(cells.begin(), cells.end());
  return cells;
}

/// Exact basic flows for a given basis tree and unperturbed marginals, by
/// repeated leaf elimination.
inline RealMatrix solve_tree_flows(const SimplexState& st,
                                   const std::vector<double>& supply,
                                   const std::vector<double>& demand) {
  std::vector<double> balance(st.m + st.n);
  for (int i = 0; i < st.m; ++i) balance[i] = supply[i];
  for (int j = 0; j < st.n; ++j) balance[st.m + j] = demand[j];
  auto adj = st.adjacency();
  std::vector<int> degree(st.m + st.n);
  std::vector<char> removed_cell(st.m * st.n, 0);
  std::vector<char> removed_node(st.m + st.n, 0);
  for (int node = 0; node < st.m + st.n; ++node) {
    degree[node] = static_cast<int>(adj[node].size());
  }
  RealMatrix flow = RealMatrix::Zero(st.m, st.n);
  std::vector<int> leaves;
  for (int node = 0; node < st.m + st.n; ++node) {
    if (degree[node] == 1) leaves.push_back(node);
  }
  while (!leaves.empty()) {
    const int leaf = leaves.back();
    leaves.pop_back();
    if (removed_node[leaf] || degree[leaf] == 0) continue;
    for (auto [next, cell] : adj[leaf]) {
      if (removed_cell[cell] || removed_node[next]) continue;
      const int i = cell / st.n, j = cell % st.n;
      flow(i, j) = balance[leaf];
      balance[next] -= balance[leaf];
      balance[leaf] = 0.0;
      removed_cell[cell] = 1;
      removed_node[leaf] = 1;
      if (--degree[next] == 1) leaves.push_back(next);
      degree[leaf] = 0;
      break;
    }
  }
  return flow;
}

}  // namespace detail

/// Optimal transport between two discrete phase-space measures with the
/// quadratic ground cost, by the transportation simplex: northwest-corner
/// start, MODI (u, v) pivoting, Bland's smallest-index anti-cycling rule.
/// Demands carry an epsilon perturbation (1e-13 * index) against degenerate
/// pivots; the final basis is re-solved on the unperturbed marginals, and
/// entries below 1e-11 are rounded away.
inline TransportPlan solve_discrete_mk2(const PhaseSpaceMeasure& mu,
                                        const PhaseSpaceMeasure& nu) {
  validate_measure(mu);
  validate_measure(nu);
  const int m = static_cast<int>(mu.points.size());
  const int n = static_cast<int>(nu.points.size());

  detail::SimplexState st;
  st.m = m;
  st.n = n;
  st.cost.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      st.cost(i, j) = phase_space_cost(mu.points[i], nu.points[j]);
    }
  }
  st.flow = RealMatrix::Zero(m, n);
  st.basic.assign(m, std::vector<bool>(n, false));

  std::vector<double> supply(mu.weights), demand(nu.weights);
  double bump = 0.0;
  for (int j = 0; j < n; ++j) {
    const double eps = 1e-13 * (j + 1);
    demand[j] += eps;
    bump += eps;
  }
  supply[m - 1] += bump;

  detail::northwest_corner(st, supply, demand);

  std::vector<double> u(m), v(n);
  const double enter_tol = 1e-12;
  const int max_pivots = 10000;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    detail::potentials(st, u, v);
    int enter = -1;
    for (int cell = 0; cell < m * n && enter < 0; ++cell) {
      const int i = cell / n, j = cell % n;
      if (!st.basic[i][j] && st.cost(i, j) - u[i] - v[j] < -enter_tol) {
        enter = cell;  // Bland: first improving index
      }
    }
    if (enter < 0) break;
    const int ei = enter / n, ej = enter % n;
    // Close the cycle through the tree path col(ej) -> row(ei); with the
    // entering cell prepended, odd positions along the walk lose flow.
    const auto path = detail::tree_path(st, st.node_of_col(ej), ei);
    std::vector<int> minus_cells;
    for (std::size_t idx = 0; idx < path.size(); idx += 2) {
      minus_cells.push_back(path[idx]);
    }
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (int cell : minus_cells) {
      const double f = st.flow(cell / n, cell % n);
      if (f < theta - 1e-18 || (std::abs(f - theta) <= 1e-18 && cell < leave)) {
        theta = f;
        leave = cell;
      }
    }
    st.flow(ei, ej) += theta;
    double sign = -1.0;
    for (int cell : path) {
      st.flow(cell / n, cell % n) += sign * theta;
      sign = -sign;
    }
    st.basic[ei][ej] = true;
    st.basic[leave / n][leave % n] = false;
    st.flow(leave / n, leave % n) = 0.0;
  }

  // Same basis, unperturbed marginals: the tree determines the flows exactly.
  RealMatrix flow = detail::solve_tree_flows(st, mu.weights, nu.weights);
  TransportPlan plan;
  plan.matrix = flow.unaryExpr([](double x) { return std::abs(x) < 1e-11 ? 0.0 : x; });
  plan.cost = (plan.matrix.array() * st.cost.array()).sum();
  return plan;
}

/// Exact optimum by enumerating the vertices of the transportation polytope:
/// every basic solution is the flow on a spanning tree of the complete
/// bipartite support graph. Supports up to 4 x 4.
inline double brute_force_mk2(const PhaseSpaceMeasure& mu,
                              const PhaseSpaceMeasure& nu) {
  validate_measure(mu);
  validate_measure(nu);
  const int m = static_cast<int>(mu.points.size());
  const int n = static_cast<int>(nu.points.size());
  if (m > 4 || n > 4) {
    throw std::invalid_argument("brute_force_mk2: support larger than 4 x 4");
  }
  RealMatrix cost(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      cost(i, j) = phase_space_cost(mu.points[i], nu.points[j]);
    }
  }
  const int nodes = m + n;
  const int edges = m * n;
  const int need = nodes - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> chosen;
  std::vector<int> parent(nodes);

  auto find_root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  auto evaluate_tree = [&]() {
    detail::SimplexState st;
    st.m = m;
    st.n = n;
    st.cost = cost;
    st.basic.assign(m, std::vector<bool>(n, false));
    for (int cell : chosen) st.basic[cell / n][cell % n] = true;
    const RealMatrix flow = detail::solve_tree_flows(st, mu.weights, nu.weights);
    if ((flow.array() < -1e-12).any()) return;  // infeasible vertex
    best = std::min(best, (flow.array() * cost.array()).sum());
  };

  // Depth-first enumeration of spanning trees with union-find pruning.
  auto recurse = [&](auto&& self, int next_edge) -> void {
    if (static_cast<int>(chosen.size()) == need) {
      evaluate_tree();
      return;
    }
    if (edges - next_edge < need - static_cast<int>(chosen.size())) return;
    for (int cell = next_edge; cell < edges; ++cell) {
      const int i = cell / n, j = m + cell % n;
      const std::vector<int> saved = parent;
      const int ri = find_root(i), rj = find_root(j);
      if (ri == rj) continue;  // would close a cycle
      parent[ri] = rj;
      chosen.push_back(cell);
      self(self, cell + 1);
      chosen.pop_back();
      parent = saved;
    }
  };
  for (int x = 0; x < nodes; ++x) parent[x] = x;
  recurse(recurse, 0);
  return best;
}

/// Semiclassical comparison: quantum transport between the Toeplitz
/// quantizations against the classical optimum plus the ground-state spread
/// 2 d hbar. The slack classical + 2 d hbar - quantum stays nonnegative up to
/// solver tolerance; it is strictly positive whenever genuinely quantum
/// couplings beat every quantized classical plan.
struct SemiclassicalGap {
  double quantum = 0.0;
  double classical = 0.0;
  double bound_slack = 0.0;
};

inline SemiclassicalGap semiclassical_gap(const PhaseSpaceMeasure& mu,
                                          const PhaseSpaceMeasure& nu,
                                          const FockSpace& space,
                                          const SolveOptions& opts = {},
                                          double tail_tol = 1e-10) {
  const DensityOperator r = toeplitz_quantize(mu, space, tail_tol);
  const DensityOperator s = toeplitz_quantize(nu, space, tail_tol);
  SemiclassicalGap gap;
  gap.quantum = compute_mk2(r, s, opts).mk2;
  gap.classical = solve_discrete_mk2(mu, nu).cost;
  gap.bound_slack = gap.classical + 2.0 * space.dim_d * space.hbar - gap.quantum;
  return gap;
}

}  // namespace qmk
