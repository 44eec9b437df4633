#include "ccmf/graph.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ccmf/errors.hpp"

namespace ccmf {

namespace detail {

TransportGraph make_transport_graph(int node_count, std::vector<std::pair<int, int>> edges,
                                    int source, int sink, int st_edge, Vector capacity,
                                    bool check_connectivity);

}  // namespace detail

TransportGraph TransportGraph::create(int node_count, std::vector<std::pair<int, int>> edges,
                                      int source, int sink, int st_edge, Vector capacity) {
  return detail::make_transport_graph(node_count, std::move(edges), source, sink, st_edge,
                                      std::move(capacity), true);
}

TransportGraph detail::make_transport_graph(int node_count,
                                            std::vector<std::pair<int, int>> edges, int source,
                                            int sink, int st_edge, Vector capacity,
                                            bool check_connectivity) {
  if (node_count < 2) throw GraphStructureError("transport graph needs at least source and sink");
  if (source < 0 || source >= node_count || sink < 0 || sink >= node_count || source == sink)
    throw GraphStructureError("invalid source/sink ids");
  if (st_edge < 0 || st_edge >= static_cast<int>(edges.size()))
    throw GraphStructureError("st edge index out of range");
  if (edges[st_edge] != std::make_pair(sink, source))
    throw GraphStructureError("st edge must be oriented sink -> source");
  if (capacity.size() != node_count)
    throw DimensionError("capacity vector length does not match node count");
  for (int i = 0; i < node_count; ++i)
    if (!(capacity[i] > 0.0)) throw InvalidArgumentError("node capacities must be strictly positive");

  std::set<std::pair<int, int>> seen;
  for (const auto& [tail, head] : edges) {
    if (tail < 0 || tail >= node_count || head < 0 || head >= node_count)
      throw GraphStructureError("edge endpoint out of range");
    if (tail == head) throw GraphStructureError("self loops are not allowed");
    auto key = std::minmax(tail, head);
    if (!seen.insert({key.first, key.second}).second)
      throw GraphStructureError("duplicate edge between the same node pair");
  }

  // Connectivity in the undirected sense; flows are signed, so this is what
  // guarantees the Newton systems stay nonsingular. Bare lattices skip it:
  // they only become connected once unary terms are attached.
  if (check_connectivity) {
    std::vector<std::vector<int>> adj(node_count);
    for (const auto& [tail, head] : edges) {
      adj[tail].push_back(head);
      adj[head].push_back(tail);
    }
    std::vector<char> visited(node_count, 0);
    std::vector<int> stack{source};
    visited[source] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (!visited[w]) {
          visited[w] = 1;
          stack.push_back(w);
        }
    }
    if (std::find(visited.begin(), visited.end(), 0) != visited.end())
      throw GraphStructureError("graph is not connected; some node cannot carry flow");
  }

  TransportGraph g;
  g.node_count = node_count;
  g.edges = std::move(edges);
  g.source = source;
  g.sink = sink;
  g.st_edge = st_edge;
  g.capacity = std::move(capacity);
  return g;
}

Vector IncidenceOperator::gradient(const Vector& node_field) const {
  if (node_field.size() != matrix.cols()) throw DimensionError("node field length mismatch");
  return matrix * node_field;
}

IncidenceOperator build_incidence(const TransportGraph& graph) {
  const int m = graph.edge_count();
  const int n = graph.node_count;
  std::vector<Eigen::Triplet<double>> signed_entries, abs_entries;
  signed_entries.reserve(2 * m);
  abs_entries.reserve(2 * m);
  for (int e = 0; e < m; ++e) {
    const auto& [tail, head] = graph.edges[e];
    signed_entries.emplace_back(e, tail, 1.0);
    signed_entries.emplace_back(e, head, -1.0);
    abs_entries.emplace_back(e, tail, 1.0);
    abs_entries.emplace_back(e, head, 1.0);
  }
  IncidenceOperator ops;
  ops.matrix.resize(m, n);
  ops.matrix.setFromTriplets(signed_entries.begin(), signed_entries.end());
  ops.abs_matrix.resize(m, n);
  ops.abs_matrix.setFromTriplets(abs_entries.begin(), abs_entries.end());
  return ops;
}

SourceSinkIndicator source_sink_indicator(const TransportGraph& graph) {
  SourceSinkIndicator ind;
  ind.st_selector = Vector::Zero(graph.edge_count());
  ind.st_selector[graph.st_edge] = 1.0;
  ind.source_sink_sign = Vector::Zero(graph.node_count);
  ind.source_sink_sign[graph.source] = 1.0;
  ind.source_sink_sign[graph.sink] = -1.0;
  return ind;
}

Vector divergence(const IncidenceOperator& ops, const Vector& flow) {
  if (flow.size() != ops.matrix.rows()) throw DimensionError("flow length does not match edge count");
  return ops.matrix.transpose() * flow;
}

Vector pointwise_flow_norm(const IncidenceOperator& ops, const Vector& flow) {
  if (flow.size() != ops.matrix.rows()) throw DimensionError("flow length does not match edge count");
  Vector squared = ops.abs_matrix.transpose() * flow.cwiseProduct(flow);
  return squared.cwiseSqrt();
}

// ---------------------------------------------------------------------------
// Grid construction

namespace {

void check_extents(const Extents& e) {
  if (e.x < 1 || e.y < 1 || e.z < 1) throw InvalidArgumentError("extents must be positive");
}

// Neighbor offsets in +x, +y, +z order; edge enumeration is raster order of
// the tail with this axis order, which fixes the lexicographic orientation.
struct LatticeEdge {
  int a, b;  // pixel indices, a < b in raster order
};

std::vector<LatticeEdge> lattice_edges(const Extents& ext) {
  std::vector<LatticeEdge> out;
  out.reserve(3u * static_cast<std::size_t>(ext.count()));
  for (int z = 0; z < ext.z; ++z)
    for (int y = 0; y < ext.y; ++y)
      for (int x = 0; x < ext.x; ++x) {
        int p = ext.index(x, y, z);
        if (x + 1 < ext.x) out.push_back({p, ext.index(x + 1, y, z)});
        if (y + 1 < ext.y) out.push_back({p, ext.index(x, y + 1, z)});
        if (z + 1 < ext.z) out.push_back({p, ext.index(x, y, z + 1)});
      }
  return out;
}

GridGraph build_grid(const Extents& ext, const Vector& pixel_capacity,
                     const std::vector<std::uint8_t>& seeds, double terminal_capacity,
                     bool require_seeds) {
  check_extents(ext);
  const int pixels = ext.count();
  if (pixel_capacity.size() != pixels) throw DimensionError("capacity length != pixel count");
  for (int i = 0; i < pixels; ++i)
    if (!(pixel_capacity[i] > 0.0))
      throw InvalidArgumentError("pixel capacities must be strictly positive");
  if (!seeds.empty() && static_cast<int>(seeds.size()) != pixels)
    throw DimensionError("seed mask length != pixel count");

  int fg_count = 0, bg_count = 0;
  for (std::uint8_t s : seeds) {
    if (s == kSeedForeground) ++fg_count;
    else if (s == kSeedBackground) ++bg_count;
    else if (s != kSeedNone) throw InvalidArgumentError("seed labels must be 0, 1, or 2");
  }
  if (require_seeds && (fg_count == 0 || bg_count == 0))
    throw InvalidArgumentError("both seed classes must be nonempty");

  GridGraph grid;
  grid.extents = ext;
  grid.pixel_node.assign(pixels, 0);

  // Source is node 0, sink node 1, free pixels follow in raster order.
  const int source = 0, sink = 1;
  int next = 2;
  std::vector<int> node_pixel{-1, -1};
  for (int p = 0; p < pixels; ++p) {
    std::uint8_t s = seeds.empty() ? kSeedNone : seeds[p];
    if (s == kSeedForeground) {
      grid.pixel_node[p] = GridGraph::kPixelSource;
    } else if (s == kSeedBackground) {
      grid.pixel_node[p] = GridGraph::kPixelSink;
    } else {
      grid.pixel_node[p] = next++;
      node_pixel.push_back(p);
    }
  }
  const int n = next;

  auto to_node = [&](int p) {
    int v = grid.pixel_node[p];
    if (v == GridGraph::kPixelSource) return source;
    if (v == GridGraph::kPixelSink) return sink;
    return v;
  };

  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  for (const LatticeEdge& le : lattice_edges(ext)) {
    int u = to_node(le.a), v = to_node(le.b);
    if (u == v) continue;                                  // same-side seed pair
    if ((u == source && v == sink) || (u == sink && v == source)) continue;  // adjacent fg/bg
    auto key = std::minmax(u, v);
    if (!seen.insert({key.first, key.second}).second) continue;  // merge parallels
    edges.emplace_back(u, v);
  }
  int st_edge = static_cast<int>(edges.size());
  edges.emplace_back(sink, source);

  Vector capacity(n);
  double total = 0.0;
  for (int v = 2; v < n; ++v) {
    capacity[v] = pixel_capacity[node_pixel[v]];
    total += capacity[v];
  }
  double terminal = terminal_capacity > 0.0 ? terminal_capacity : std::max(total, 1.0);
  capacity[source] = terminal;
  capacity[sink] = terminal;

  grid.graph = detail::make_transport_graph(n, std::move(edges), source, sink, st_edge,
                                            std::move(capacity), require_seeds);
  grid.node_pixel = std::move(node_pixel);
  return grid;
}

}  // namespace

std::vector<std::uint8_t> GridGraph::pixel_mask(const std::vector<std::uint8_t>& node_mask) const {
  if (static_cast<int>(node_mask.size()) != graph.node_count)
    throw DimensionError("node mask length != node count");
  std::vector<std::uint8_t> out(pixel_node.size(), 0);
  for (std::size_t p = 0; p < pixel_node.size(); ++p) {
    int v = pixel_node[p];
    if (v == kPixelSource) out[p] = 1;
    else if (v == kPixelSink) out[p] = 0;
    else out[p] = node_mask[v];
  }
  return out;
}

Vector GridGraph::pixel_field(const Vector& node_values, double source_fill,
                              double sink_fill) const {
  if (node_values.size() != graph.node_count)
    throw DimensionError("node value length != node count");
  Vector out(static_cast<Eigen::Index>(pixel_node.size()));
  for (std::size_t p = 0; p < pixel_node.size(); ++p) {
    int v = pixel_node[p];
    if (v == kPixelSource) out[p] = source_fill;
    else if (v == kPixelSink) out[p] = sink_fill;
    else out[p] = node_values[v];
  }
  return out;
}

GridGraph grid_graph(const Extents& extents, const Vector& pixel_capacity,
                     const std::vector<std::uint8_t>& seeds, double terminal_capacity) {
  return build_grid(extents, pixel_capacity, seeds, terminal_capacity, true);
}

GridGraph grid_graph(const Extents& extents, const Vector& pixel_capacity,
                     const std::vector<int>& fg_seeds, const std::vector<int>& bg_seeds,
                     double terminal_capacity) {
  check_extents(extents);
  if (fg_seeds.empty() || bg_seeds.empty())
    throw InvalidArgumentError("both seed classes must be nonempty");
  std::vector<std::uint8_t> mask(extents.count(), kSeedNone);
  for (int p : fg_seeds) {
    if (p < 0 || p >= extents.count()) throw InvalidArgumentError("seed pixel out of bounds");
    mask[p] = kSeedForeground;
  }
  for (int p : bg_seeds) {
    if (p < 0 || p >= extents.count()) throw InvalidArgumentError("seed pixel out of bounds");
    if (mask[p] == kSeedForeground) throw InvalidArgumentError("overlapping seeds");
    mask[p] = kSeedBackground;
  }
  return build_grid(extents, pixel_capacity, mask, terminal_capacity, true);
}

GridGraph bare_grid_graph(const Extents& extents, const Vector& pixel_capacity,
                          double terminal_capacity) {
  return build_grid(extents, pixel_capacity, {}, terminal_capacity, false);
}

GridGraph attach_unary_terms(const GridGraph& grid, const Vector& fg_prior,
                             const Vector& bg_prior) {
  const TransportGraph& base = grid.graph;
  const int pixels = grid.extents.count();
  if (fg_prior.size() != pixels || bg_prior.size() != pixels)
    throw DimensionError("prior length != pixel count");

  std::vector<int> lattice_nodes;
  for (int v = 0; v < base.node_count; ++v)
    if (grid.node_pixel[v] >= 0) lattice_nodes.push_back(v);
  for (int v : lattice_nodes) {
    int p = grid.node_pixel[v];
    if (!(fg_prior[p] > 0.0) || !(bg_prior[p] > 0.0))
      throw InvalidArgumentError("priors must be strictly positive");
  }

  const int n0 = base.node_count;
  const int n = n0 + 2 * static_cast<int>(lattice_nodes.size());
  std::vector<std::pair<int, int>> edges;
  edges.reserve(base.edges.size() + 4 * lattice_nodes.size());
  for (int e = 0; e < base.edge_count(); ++e)
    if (e != base.st_edge) edges.push_back(base.edges[e]);

  Vector capacity(n);
  capacity.head(n0) = base.capacity;
  std::vector<int> node_pixel = grid.node_pixel;
  int next = n0;
  for (int v : lattice_nodes) {
    int p = grid.node_pixel[v];
    int upper = next++;
    int lower = next++;
    capacity[upper] = fg_prior[p];
    capacity[lower] = bg_prior[p];
    edges.emplace_back(base.source, upper);
    edges.emplace_back(upper, v);
    edges.emplace_back(v, lower);
    edges.emplace_back(lower, base.sink);
    node_pixel.push_back(-1);
    node_pixel.push_back(-1);
  }
  int st_edge = static_cast<int>(edges.size());
  edges.emplace_back(base.sink, base.source);

  double total = 0.0;
  for (int v = 0; v < n; ++v)
    if (v != base.source && v != base.sink) total += capacity[v];
  capacity[base.source] = std::max(total, 1.0);
  capacity[base.sink] = capacity[base.source];

  GridGraph out;
  out.extents = grid.extents;
  out.pixel_node = grid.pixel_node;
  out.node_pixel = std::move(node_pixel);
  out.graph = TransportGraph::create(n, std::move(edges), base.source, base.sink, st_edge,
                                     std::move(capacity));
  return out;
}

// ---------------------------------------------------------------------------
// Interchange format

void write_graph(std::ostream& out, const TransportGraph& graph) {
  out << "ccmf-graph " << graph.node_count << ' ' << graph.edge_count() << ' ' << graph.source
      << ' ' << graph.sink << ' ' << graph.st_edge << '\n';
  for (const auto& [tail, head] : graph.edges) out << tail << ' ' << head << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < graph.node_count; ++i) out << graph.capacity[i] << '\n';
}

void write_graph_file(const std::string& path, const TransportGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_graph(out, graph);
  if (!out) throw IoError("write failed: " + path);
}

TransportGraph read_graph(std::istream& in) {
  std::string magic;
  in >> magic;
  if (!in || magic != "ccmf-graph") throw MalformedHeaderError("expected ccmf-graph header");
  int n, m, source, sink, st_edge;
  if (!(in >> n >> m >> source >> sink >> st_edge))
    throw MalformedHeaderError("incomplete ccmf-graph header");
  if (n < 2 || m < 1) throw MalformedHeaderError("implausible graph dimensions");
  std::vector<std::pair<int, int>> edges(m);
  for (auto& [tail, head] : edges)
    if (!(in >> tail >> head)) throw TruncatedPayloadError("edge list ends early");
  Vector capacity(n);
  for (int i = 0; i < n; ++i)
    if (!(in >> capacity[i])) throw TruncatedPayloadError("capacity list ends early");
  return TransportGraph::create(n, std::move(edges), source, sink, st_edge, std::move(capacity));
}

TransportGraph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  return read_graph(in);
}

}  // namespace ccmf
