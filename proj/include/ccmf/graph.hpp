#ifndef CCMF_GRAPH_HPP
#define CCMF_GRAPH_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ccmf {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Oriented graph with a source, a sink, a distinguished sink->source edge
/// that carries the objective flow, and strictly positive node capacities.
///
/// Immutable after construction; build through create() or the grid helpers.
struct TransportGraph {
  int node_count = 0;                      // includes source and sink
  std::vector<std::pair<int, int>> edges;  // (tail, head) node ids
  int source = -1;
  int sink = -1;
  int st_edge = -1;  // index into edges; oriented sink -> source
  Vector capacity;   // length node_count, strictly positive

  int edge_count() const { return static_cast<int>(edges.size()); }

  /// Validates all structural invariants:
  ///   - capacities strictly positive,
  ///   - exactly one st edge, oriented sink -> source,
  ///   - no self loops, no duplicate unordered edges,
  ///   - the graph is connected (so every node can interact with s and t).
  /// Throws GraphStructureError or InvalidArgumentError.
  static TransportGraph create(int node_count, std::vector<std::pair<int, int>> edges,
                               int source, int sink, int st_edge, Vector capacity);
};

/// The signed edge-node incidence matrix (discrete gradient) and its
/// entrywise absolute value. Row order follows the graph's edge order,
/// column order the node ids.
struct IncidenceOperator {
  SparseMatrix matrix;      // m x n, +1 at tail, -1 at head
  SparseMatrix abs_matrix;  // entrywise absolute value

  int edge_count() const { return static_cast<int>(matrix.rows()); }
  int node_count() const { return static_cast<int>(matrix.cols()); }

  /// matrix * u : node field -> edge field (discrete gradient).
  Vector gradient(const Vector& node_field) const;
};

/// c picks out the st edge; a is +1 at the source, -1 at the sink.
struct SourceSinkIndicator {
  Vector st_selector;       // length m, 1 at st_edge
  Vector source_sink_sign;  // length n, +1 source, -1 sink
};

IncidenceOperator build_incidence(const TransportGraph& graph);
SourceSinkIndicator source_sink_indicator(const TransportGraph& graph);

/// A^T F : net outflow per node. Throws DimensionError on length mismatch.
Vector divergence(const IncidenceOperator& ops, const Vector& flow);

/// sqrt(|A^T| F^2) : Euclidean norm of the flows incident to each node.
Vector pointwise_flow_norm(const IncidenceOperator& ops, const Vector& flow);

/// Extents of a 2D (z == 1) or 3D pixel lattice, raster-ordered
/// idx = x + sx * (y + sy * z).
struct Extents {
  int x = 1;
  int y = 1;
  int z = 1;

  int count() const { return x * y * z; }
  int dims() const { return z > 1 ? 3 : 2; }
  int index(int px, int py, int pz = 0) const { return px + x * (py + y * pz); }
  bool operator==(const Extents&) const = default;
};

constexpr std::uint8_t kSeedNone = 0;
constexpr std::uint8_t kSeedBackground = 1;
constexpr std::uint8_t kSeedForeground = 2;

/// A transport graph built from a pixel lattice, keeping the pixel <-> node
/// correspondence so dual variables can be written back as images.
struct GridGraph {
  TransportGraph graph;
  Extents extents;
  std::vector<int> pixel_node;  // per pixel: node id, kPixelSource, or kPixelSink
  std::vector<int> node_pixel;  // per node: pixel index, or -1 for s/t/aux nodes

  static constexpr int kPixelSource = -1;
  static constexpr int kPixelSink = -2;

  /// Node labels mapped back onto pixels; seeds get their side's label.
  std::vector<std::uint8_t> pixel_mask(const std::vector<std::uint8_t>& node_mask) const;
  /// Node values mapped back onto pixels; seeds get the given fill values.
  Vector pixel_field(const Vector& node_values, double source_fill, double sink_fill) const;
};

/// 4-connected (2D) or 6-connected (3D) lattice with the foreground seeds
/// contracted into the source and background seeds into the sink. Edges
/// between same-side seeds are dropped, parallel edges merged, and the
/// st edge appended last. Terminal capacities default to the sum of all
/// pixel capacities (non-binding) unless terminal_capacity > 0.
///
/// seeds: per-pixel labels (kSeedNone / kSeedBackground / kSeedForeground);
/// both seed classes must be nonempty.
GridGraph grid_graph(const Extents& extents, const Vector& pixel_capacity,
                     const std::vector<std::uint8_t>& seeds, double terminal_capacity = 0.0);

/// Same, with seeds given as pixel index sets (must be disjoint and nonempty).
GridGraph grid_graph(const Extents& extents, const Vector& pixel_capacity,
                     const std::vector<int>& fg_seeds, const std::vector<int>& bg_seeds,
                     double terminal_capacity = 0.0);

/// Seedless lattice (s and t joined only by the st edge), the starting point
/// for unary-term construction.
GridGraph bare_grid_graph(const Extents& extents, const Vector& pixel_capacity,
                          double terminal_capacity = 0.0);

/// For every lattice node v adds an upper node (capacity fg_prior, edges
/// s -> upper -> v) and a lower node (capacity bg_prior, edges v -> lower -> t).
/// Priors are indexed by pixel and must be strictly positive.
GridGraph attach_unary_terms(const GridGraph& grid, const Vector& fg_prior,
                             const Vector& bg_prior);

/// Text interchange format:
///   ccmf-graph n m source sink st_edge
///   m lines "tail head"
///   n lines "g_i"
/// Capacities are printed with max_digits10 so write/read round-trips exactly.
void write_graph(std::ostream& out, const TransportGraph& graph);
void write_graph_file(const std::string& path, const TransportGraph& graph);
TransportGraph read_graph(std::istream& in);
TransportGraph read_graph_file(const std::string& path);

}  // namespace ccmf

#endif
