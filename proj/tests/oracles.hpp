// Independent reference computations used by the tests: brute-force flow
// maximization over the cycle space, exhaustive min cut, a dense solve of the
// full Newton system, and random instance generators. Nothing here shares
// code with the solver paths it checks.
#ifndef CCMF_TEST_ORACLES_HPP
#define CCMF_TEST_ORACLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "ccmf/baselines.hpp"
#include "ccmf/graph.hpp"
#include "ccmf/solver.hpp"

namespace ccmf_test {

using ccmf::Vector;

// --- Hand-built instances ---------------------------------------------------

// s -- v -- t plus the st edge; all capacities 1 unless given.
// Divergence-free flow is uniform on the cycle; each node sees two unit
// flows, so 2 F^2 <= 1 and the analytic optimum is F_st = 1/sqrt(2).
inline ccmf::TransportGraph one_path_graph(double cap = 1.0) {
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 0}};
  return ccmf::TransportGraph::create(3, edges, 0, 2, 2, Vector::Constant(3, cap));
}

// s -- v1 -- t and s -- v2 -- t plus the st edge, capacities 1. Symmetry
// gives path flows F_st/2; the binding constraint at s reads
// 2 (F_st/2)^2 + F_st^2 <= 1, so F_st = sqrt(2/3).
inline ccmf::TransportGraph two_parallel_paths_graph() {
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 3}, {0, 2}, {2, 3}, {3, 0}};
  return ccmf::TransportGraph::create(4, edges, 0, 3, 4, Vector::Ones(4));
}

// --- Random instances --------------------------------------------------------

// Random connected transport graph: a random spanning tree plus extra edges,
// capacities uniform in [cap_lo, cap_hi], st edge appended last.
inline ccmf::TransportGraph random_transport_graph(std::mt19937_64& rng, int node_count,
                                                   double cap_lo = 0.1, double cap_hi = 2.0,
                                                   double extra_edge_prob = 0.3) {
  const int source = 0, sink = node_count - 1;
  std::uniform_real_distribution<double> cap(cap_lo, cap_hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<int> order(node_count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> edges;
  auto add_edge = [&](int u, int v) {
    auto key = std::minmax(u, v);
    if (key.first == std::min(source, sink) && key.second == std::max(source, sink)) return;
    if (seen.insert({key.first, key.second}).second) edges.emplace_back(u, v);
  };
  for (int i = 1; i < node_count; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    add_edge(order[pick(rng)], order[i]);
  }
  for (int u = 0; u < node_count; ++u)
    for (int v = u + 1; v < node_count; ++v)
      if (coin(rng) < extra_edge_prob) add_edge(u, v);

  int st_edge = static_cast<int>(edges.size());
  edges.emplace_back(sink, source);
  Vector g(node_count);
  for (int i = 0; i < node_count; ++i) g[i] = cap(rng);
  return ccmf::TransportGraph::create(node_count, std::move(edges), source, sink, st_edge,
                                      std::move(g));
}

// --- Cycle space -------------------------------------------------------------

// Fundamental cycle basis from a BFS spanning tree: every basis vector is a
// circulation (A^T C = 0) with entries in {-1, 0, +1}.
inline std::vector<Vector> cycle_basis(const ccmf::TransportGraph& graph) {
  const int n = graph.node_count;
  const int m = graph.edge_count();
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge)
  for (int e = 0; e < m; ++e) {
    adj[graph.edges[e].first].push_back({graph.edges[e].second, e});
    adj[graph.edges[e].second].push_back({graph.edges[e].first, e});
  }
  std::vector<int> parent_edge(n, -1), parent(n, -1), depth(n, 0);
  std::vector<char> in_tree(m, 0), visited(n, 0);
  std::vector<int> queue{0};
  visited[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int v = queue[head];
    for (auto [w, e] : adj[v])
      if (!visited[w]) {
        visited[w] = 1;
        parent[w] = v;
        parent_edge[w] = e;
        depth[w] = depth[v] + 1;
        in_tree[e] = 1;
        queue.push_back(w);
      }
  }

  // Coefficient of the tree edge above x when the cycle travels x -> parent.
  auto step = [&](int x) { return graph.edges[parent_edge[x]].first == x ? 1.0 : -1.0; };

  std::vector<Vector> basis;
  for (int e = 0; e < m; ++e) {
    if (in_tree[e]) continue;
    Vector c = Vector::Zero(m);
    c[e] = 1.0;  // tail -> head, then back along the tree path head -> tail
    int a = graph.edges[e].second;  // travels toward the LCA
    int b = graph.edges[e].first;   // cycle runs LCA -> b, so signs negate
    while (depth[a] > depth[b]) {
      c[parent_edge[a]] += step(a);
      a = parent[a];
    }
    while (depth[b] > depth[a]) {
      c[parent_edge[b]] -= step(b);
      b = parent[b];
    }
    while (a != b) {
      c[parent_edge[a]] += step(a);
      a = parent[a];
      c[parent_edge[b]] -= step(b);
      b = parent[b];
    }
    basis.push_back(c);
  }
  return basis;
}

// Random circulation scaled strictly inside the capacity region.
inline Vector random_feasible_flow(const ccmf::TransportGraph& graph, std::mt19937_64& rng,
                                   double shrink = 0.98) {
  auto basis = cycle_basis(graph);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector flow = Vector::Zero(graph.edge_count());
  for (const Vector& c : basis) flow += gauss(rng) * c;

  ccmf::IncidenceOperator ops = ccmf::build_incidence(graph);
  Vector norm = ccmf::pointwise_flow_norm(ops, flow);
  double worst = 0.0;
  for (int i = 0; i < graph.node_count; ++i)
    worst = std::max(worst, norm[i] / graph.capacity[i]);
  if (worst > 0.0) flow *= shrink / worst;
  return flow;
}

// --- Brute-force maximizer ---------------------------------------------------

// Dense grid search over the cycle space with shrinking refinement. The
// objective is linear and the feasible set convex, so the incumbent
// converges to the global maximum of F_st.
inline double brute_force_max_flow(const ccmf::TransportGraph& graph, int levels = 14,
                                   int steps = 10) {
  auto basis = cycle_basis(graph);
  const int k = static_cast<int>(basis.size());
  if (k == 0) return 0.0;
  if (k > 3) throw std::runtime_error("brute force limited to cycle dimension 3");

  ccmf::IncidenceOperator ops = ccmf::build_incidence(graph);
  auto feasible = [&](const Vector& flow) {
    Vector norm = ccmf::pointwise_flow_norm(ops, flow);
    for (int i = 0; i < graph.node_count; ++i)
      if (norm[i] > graph.capacity[i]) return false;
    return true;
  };

  double radius = 2.0 * graph.capacity.maxCoeff() * graph.edge_count();
  Vector center = Vector::Zero(k);
  double best = 0.0;
  Vector best_x = center;

  for (int level = 0; level < levels; ++level) {
    std::vector<int> idx(k, -steps);
    for (;;) {
      Vector x = center;
      for (int d = 0; d < k; ++d) x[d] += radius * idx[d] / steps;
      Vector flow = Vector::Zero(graph.edge_count());
      for (int d = 0; d < k; ++d) flow += x[d] * basis[d];
      if (feasible(flow) && flow[graph.st_edge] > best) {
        best = flow[graph.st_edge];
        best_x = x;
      }
      int d = 0;
      while (d < k && ++idx[d] > steps) idx[d++] = -steps;
      if (d == k) break;
    }
    center = best_x;
    radius *= 0.4;
  }
  return best;
}

// --- Exhaustive min cut ------------------------------------------------------

// Minimum over all source/sink partitions of the sum of capacities of the
// crossing edges (st edge excluded).
inline double exhaustive_min_cut(const ccmf::EdgeCapacitatedGraph& graph) {
  const int n = graph.node_count;
  std::vector<int> free_nodes;
  for (int v = 0; v < n; ++v)
    if (v != graph.source && v != graph.sink) free_nodes.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t bits = 0; bits < (1u << free_nodes.size()); ++bits) {
    std::vector<char> side(n, 0);
    side[graph.source] = 1;
    for (std::size_t i = 0; i < free_nodes.size(); ++i) side[free_nodes[i]] = (bits >> i) & 1u;
    double cut = 0.0;
    for (int e = 0; e < graph.edge_count(); ++e) {
      if (e == graph.st_edge) continue;
      if (side[graph.edges[e].first] != side[graph.edges[e].second]) cut += graph.edge_capacity[e];
    }
    best = std::min(best, cut);
  }
  return best;
}

// --- Dense Newton-system reference -------------------------------------------

// Solves the anchored full KKT system with a dense full-pivot factorization.
inline ccmf::NewtonDirection dense_newton_reference(const ccmf::CcmfProblem& problem,
                                                    const Vector& flow, const Vector& lambda,
                                                    const Vector& nu, double t_barrier) {
  ccmf::KktSystem sys = problem.assemble_kkt(flow, lambda, nu, t_barrier);
  Eigen::MatrixXd dense = Eigen::MatrixXd(sys.anchored());
  Eigen::VectorXd delta = dense.fullPivLu().solve(sys.rhs);
  const int m = sys.flow_vars, n = sys.node_vars;
  ccmf::NewtonDirection d;
  d.flow = delta.head(m);
  d.lambda = delta.segment(m, n);
  d.nu = delta.tail(n);
  return d;
}

}  // namespace ccmf_test

#endif
