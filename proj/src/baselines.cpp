#include "ccmf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "ccmf/datasets.hpp"
#include "ccmf/errors.hpp"
#include "ccmf/solver.hpp"

namespace ccmf {

EdgeCapacitatedGraph EdgeCapacitatedGraph::create(int node_count,
                                                  std::vector<std::pair<int, int>> edges,
                                                  int source, int sink, int st_edge,
                                                  Vector edge_capacity) {
  if (node_count < 2) throw GraphStructureError("graph needs at least source and sink");
  if (source < 0 || source >= node_count || sink < 0 || sink >= node_count || source == sink)
    throw GraphStructureError("invalid source/sink ids");
  if (st_edge < 0 || st_edge >= static_cast<int>(edges.size()))
    throw GraphStructureError("st edge index out of range");
  if (edges[st_edge] != std::make_pair(sink, source))
    throw GraphStructureError("st edge must be oriented sink -> source");
  if (edge_capacity.size() != static_cast<int>(edges.size()))
    throw DimensionError("edge capacity length != edge count");

  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const auto& [tail, head] = edges[e];
    if (tail < 0 || tail >= node_count || head < 0 || head >= node_count)
      throw GraphStructureError("edge endpoint out of range");
    if (tail == head) throw GraphStructureError("self loops are not allowed");
    if (!(edge_capacity[e] > 0.0))
      throw InvalidArgumentError("edge capacities must be strictly positive");
    if (e == st_edge) continue;  // a direct s-t pipe may coexist with the st edge
    auto key = std::minmax(tail, head);
    if (key != std::minmax(source, sink) && !seen.insert({key.first, key.second}).second)
      throw GraphStructureError("duplicate edge between the same node pair");
  }

  EdgeCapacitatedGraph g;
  g.node_count = node_count;
  g.edges = std::move(edges);
  g.source = source;
  g.sink = sink;
  g.st_edge = st_edge;
  g.edge_capacity = std::move(edge_capacity);
  return g;
}

// ---------------------------------------------------------------------------
// Dinic max-flow on undirected pipes

namespace {

struct Dinic {
  struct Arc {
    int to;
    double cap;
    int rev;
  };
  static constexpr double kEps = 1e-12;

  std::vector<std::vector<Arc>> adj;
  std::vector<int> level, iter;

  explicit Dinic(int n) : adj(n), level(n), iter(n) {}

  void add_undirected(int u, int v, double cap) {
    Arc a{v, cap, static_cast<int>(adj[v].size())};
    Arc b{u, cap, static_cast<int>(adj[u].size())};
    adj[u].push_back(a);
    adj[v].push_back(b);
  }

  bool bfs(int s, int t) {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const Arc& a : adj[v])
        if (a.cap > kEps && level[a.to] < 0) {
          level[a.to] = level[v] + 1;
          q.push(a.to);
        }
    }
    return level[t] >= 0;
  }

  double dfs(int v, int t, double pushed) {
    if (v == t) return pushed;
    for (int& i = iter[v]; i < static_cast<int>(adj[v].size()); ++i) {
      Arc& a = adj[v][i];
      if (a.cap > kEps && level[a.to] == level[v] + 1) {
        double got = dfs(a.to, t, std::min(pushed, a.cap));
        if (got > kEps) {
          a.cap -= got;
          adj[a.to][a.rev].cap += got;
          return got;
        }
      }
    }
    return 0.0;
  }

  double run(int s, int t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::fill(iter.begin(), iter.end(), 0);
      double pushed;
      while ((pushed = dfs(s, t, std::numeric_limits<double>::infinity())) > kEps)
        total += pushed;
    }
    return total;
  }

  std::vector<std::uint8_t> source_side(int s) const {
    std::vector<std::uint8_t> side(adj.size(), 0);
    std::queue<int> q;
    side[s] = 1;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const Arc& a : adj[v])
        if (a.cap > kEps && !side[a.to]) {
          side[a.to] = 1;
          q.push(a.to);
        }
    }
    return side;
  }
};

}  // namespace

MaxFlowResult classical_maxflow(const EdgeCapacitatedGraph& graph) {
  Dinic dinic(graph.node_count);
  for (int e = 0; e < graph.edge_count(); ++e) {
    if (e == graph.st_edge) continue;
    dinic.add_undirected(graph.edges[e].first, graph.edges[e].second, graph.edge_capacity[e]);
  }
  MaxFlowResult result;
  result.value = dinic.run(graph.source, graph.sink);
  result.source_side = dinic.source_side(graph.source);
  return result;
}

// ---------------------------------------------------------------------------
// Lattice helpers for the classical baseline

namespace {

struct BareLattice {
  std::vector<std::pair<int, int>> edges;  // pixel index pairs, raster order
};

BareLattice bare_lattice(const Extents& ext) {
  BareLattice lat;
  for (int z = 0; z < ext.z; ++z)
    for (int y = 0; y < ext.y; ++y)
      for (int x = 0; x < ext.x; ++x) {
        int p = ext.index(x, y, z);
        if (x + 1 < ext.x) lat.edges.emplace_back(p, ext.index(x + 1, y, z));
        if (y + 1 < ext.y) lat.edges.emplace_back(p, ext.index(x, y + 1, z));
        if (z + 1 < ext.z) lat.edges.emplace_back(p, ext.index(x, y, z + 1));
      }
  return lat;
}

}  // namespace

Vector gc_edge_weights(const ImageGrid& image, double beta) {
  image.validate();
  if (beta < 0.0) throw InvalidArgumentError("beta must be nonnegative");
  BareLattice lat = bare_lattice(image.extents);
  Vector weights(static_cast<Eigen::Index>(lat.edges.size()));
  for (std::size_t e = 0; e < lat.edges.size(); ++e) {
    double diff = image.intensity[lat.edges[e].first] - image.intensity[lat.edges[e].second];
    weights[e] = std::exp(-beta * diff * diff);
  }
  return weights;
}

EdgeCapacitatedGraph grid_edge_graph(const Extents& extents,
                                     const std::vector<std::uint8_t>& seeds,
                                     const Vector& lattice_weights) {
  const int pixels = extents.count();
  if (static_cast<int>(seeds.size()) != pixels) throw DimensionError("seed mask length != pixels");
  BareLattice lat = bare_lattice(extents);
  if (lattice_weights.size() != static_cast<int>(lat.edges.size()))
    throw DimensionError("weight length != lattice edge count");

  const int source = 0, sink = 1;
  std::vector<int> pixel_node(pixels);
  int next = 2;
  int fg = 0, bg = 0;
  for (int p = 0; p < pixels; ++p) {
    if (seeds[p] == kSeedForeground) {
      pixel_node[p] = source;
      ++fg;
    } else if (seeds[p] == kSeedBackground) {
      pixel_node[p] = sink;
      ++bg;
    } else if (seeds[p] == kSeedNone) {
      pixel_node[p] = next++;
    } else {
      throw InvalidArgumentError("seed labels must be 0, 1, or 2");
    }
  }
  if (fg == 0 || bg == 0) throw InvalidArgumentError("both seed classes must be nonempty");

  std::map<std::pair<int, int>, double> merged;  // parallel pipes sum
  for (std::size_t e = 0; e < lat.edges.size(); ++e) {
    int u = pixel_node[lat.edges[e].first];
    int v = pixel_node[lat.edges[e].second];
    if (u == v) continue;
    if ((u == source && v == sink) || (u == sink && v == source)) continue;
    auto key = std::minmax(u, v);
    merged[{key.first, key.second}] += lattice_weights[e];
  }

  std::vector<std::pair<int, int>> edges;
  Vector capacity(static_cast<Eigen::Index>(merged.size()) + 1);
  int e = 0;
  for (const auto& [pair, cap] : merged) {
    edges.push_back(pair);
    capacity[e++] = cap;
  }
  int st_edge = e;
  edges.emplace_back(sink, source);
  capacity[e] = 1.0;  // unused; the st edge carries the objective
  return EdgeCapacitatedGraph::create(next, std::move(edges), source, sink, st_edge,
                                      std::move(capacity));
}

// ---------------------------------------------------------------------------
// Metrication probe

namespace {

double ccmf_cut_energy(const GridGraph& grid) {
  SolveResult sol = solve(grid.graph, SolverConfig::strict());
  Vector cap_sq = grid.graph.capacity.cwiseProduct(grid.graph.capacity);
  return 2.0 * sol.dual.lambda.dot(cap_sq);
}

}  // namespace

MetricationProbe metrication_probe(int length) {
  if (length < 8) throw InvalidArgumentError("probe length must be at least 8 pixels");

  MetricationProbe probe;

  {  // Axis probe: vertical cut of Euclidean length L between two seed slabs.
    const int seed_w = 2, band_w = 7;
    Extents ext{2 * seed_w + band_w, length, 1};
    std::vector<std::uint8_t> seeds(ext.count(), kSeedNone);
    for (int y = 0; y < ext.y; ++y)
      for (int x = 0; x < ext.x; ++x) {
        if (x < seed_w) seeds[ext.index(x, y)] = kSeedForeground;
        else if (x >= ext.x - seed_w) seeds[ext.index(x, y)] = kSeedBackground;
      }
    Vector uniform = Vector::Ones(static_cast<Eigen::Index>(bare_lattice(ext).edges.size()));
    probe.axis_length = static_cast<double>(length);
    probe.gc_axis_cost = classical_maxflow(grid_edge_graph(ext, seeds, uniform)).value;
    probe.ccmf_axis_energy = ccmf_cut_energy(grid_graph(ext, Vector::Ones(ext.count()), seeds));
  }

  {  // Diagonal probe: the optimal cut hugs the foreground triangle along the
    // anti-diagonal chord of k pixels, Euclidean length k sqrt(2). The free
    // band widens away from it, so that chord is the unique shortest cut.
    const int k = std::max(4, static_cast<int>(std::lround(length / std::sqrt(2.0))));
    const int band_diagonals = 5;
    const int n = k + band_diagonals + 2;
    Extents ext{n, n, 1};
    std::vector<std::uint8_t> seeds(ext.count(), kSeedNone);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        if (x + y <= k - 1) seeds[ext.index(x, y)] = kSeedForeground;
        else if (x + y >= k + band_diagonals) seeds[ext.index(x, y)] = kSeedBackground;
      }
    Vector uniform = Vector::Ones(static_cast<Eigen::Index>(bare_lattice(ext).edges.size()));
    probe.diag_length = k * std::sqrt(2.0);
    probe.gc_diag_cost = classical_maxflow(grid_edge_graph(ext, seeds, uniform)).value;
    probe.ccmf_diag_energy = ccmf_cut_energy(grid_graph(ext, Vector::Ones(ext.count()), seeds));
  }

  return probe;
}

// ---------------------------------------------------------------------------
// Appleton-Talbot iteration

AtCmfResult at_cmf_solve(const Extents& extents, const Vector& capacity,
                         const std::vector<std::uint8_t>& seeds, int iterations) {
  const int pixels = extents.count();
  if (capacity.size() != pixels) throw DimensionError("capacity length != pixel count");
  if (!seeds.empty() && static_cast<int>(seeds.size()) != pixels)
    throw DimensionError("seed mask length != pixel count");
  if (iterations < 1) throw InvalidArgumentError("iteration budget must be at least 1");

  BareLattice lat = bare_lattice(extents);
  const int m = static_cast<int>(lat.edges.size());
  const int dims = extents.dims();
  const double tau = 1.0 / std::sqrt(static_cast<double>(dims));

  // Axis of each lattice edge, for the grouped capacity constraint.
  std::vector<std::uint8_t> axis(m);
  for (int e = 0; e < m; ++e) {
    int d = lat.edges[e].second - lat.edges[e].first;
    axis[e] = d == 1 ? 0 : (d == extents.x ? 1 : 2);
  }

  Vector potential = Vector::Zero(pixels);
  Vector flow = Vector::Zero(m);
  Vector divergence(pixels), axis_max(static_cast<Eigen::Index>(pixels) * 3), scale(pixels);

  auto pin_seeds = [&] {
    for (int p = 0; p < pixels; ++p) {
      if (seeds.empty()) break;
      if (seeds[p] == kSeedForeground) potential[p] = 1.0;
      else if (seeds[p] == kSeedBackground) potential[p] = 0.0;
    }
  };
  pin_seeds();

  AtCmfResult result;
  result.trace.reserve(iterations);

  for (int it = 1; it <= iterations; ++it) {
    divergence.setZero();
    for (int e = 0; e < m; ++e) {
      divergence[lat.edges[e].first] += flow[e];
      divergence[lat.edges[e].second] -= flow[e];
    }
    potential -= tau * divergence;
    pin_seeds();

    for (int e = 0; e < m; ++e)
      flow[e] += tau * (potential[lat.edges[e].first] - potential[lat.edges[e].second]);

    // Grouped projection: max_x F^2 + max_y F^2 (+ max_z F^2) <= g^2 per
    // node, enforced by radially scaling the incident flows.
    axis_max.setZero();
    for (int e = 0; e < m; ++e) {
      double f_sq = flow[e] * flow[e];
      Eigen::Index a = static_cast<Eigen::Index>(lat.edges[e].first) * 3 + axis[e];
      Eigen::Index b = static_cast<Eigen::Index>(lat.edges[e].second) * 3 + axis[e];
      axis_max[a] = std::max(axis_max[a], f_sq);
      axis_max[b] = std::max(axis_max[b], f_sq);
    }
    for (int p = 0; p < pixels; ++p) {
      double total = axis_max[3 * p] + axis_max[3 * p + 1] + axis_max[3 * p + 2];
      double cap_sq = capacity[p] * capacity[p];
      scale[p] = total > cap_sq ? capacity[p] / std::sqrt(total) : 1.0;
    }
    for (int e = 0; e < m; ++e)
      flow[e] *= std::min(scale[lat.edges[e].first], scale[lat.edges[e].second]);

    int near_binary = 0;
    for (int p = 0; p < pixels; ++p)
      if (std::abs(potential[p] - 0.5) >= 0.4) ++near_binary;
    result.trace.push_back({it, potential.minCoeff(), potential.maxCoeff(), near_binary});
  }

  result.potential = std::move(potential);
  result.flow = std::move(flow);
  return result;
}

}  // namespace ccmf
