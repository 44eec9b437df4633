#ifndef CCMF_BASELINES_HPP
#define CCMF_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "ccmf/graph.hpp"

namespace ccmf {

struct ImageGrid;  // datasets.hpp

/// Classical transport graph: same topology as TransportGraph but with
/// strictly positive capacities on the edges. Flow on an edge is bounded in
/// magnitude (|F| <= cap), i.e. edges behave as undirected pipes; the st
/// edge carries the objective and is unconstrained.
struct EdgeCapacitatedGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  int source = -1;
  int sink = -1;
  int st_edge = -1;
  Vector edge_capacity;  // length m; entry at st_edge is ignored

  int edge_count() const { return static_cast<int>(edges.size()); }

  static EdgeCapacitatedGraph create(int node_count, std::vector<std::pair<int, int>> edges,
                                     int source, int sink, int st_edge, Vector edge_capacity);
};

struct MaxFlowResult {
  double value;
  std::vector<std::uint8_t> source_side;  // min-cut labeling, 1 = source side
};

/// Exact max-flow / min-cut (Dinic with scaling-free augmentation; exact for
/// the rational capacities used here). The st edge is skipped; every other
/// edge admits up to its capacity in either direction.
MaxFlowResult classical_maxflow(const EdgeCapacitatedGraph& graph);

/// Contrast weights for the classical baseline: cap_ij = exp(-beta (I_i - I_j)^2)
/// per lattice edge, in bare-lattice edge order. beta = 0 gives uniform 1.
Vector gc_edge_weights(const ImageGrid& image, double beta);

/// Lattice with seeds contracted for the classical solver. Parallel edges
/// produced by the contraction sum their capacities (each one is a separate
/// pipe in the classical model); same-side and source-sink collapses are
/// dropped.
EdgeCapacitatedGraph grid_edge_graph(const Extents& extents,
                                     const std::vector<std::uint8_t>& seeds,
                                     const Vector& lattice_weights);

/// Boundary energies of an axis-aligned vs a diagonal cut of (approximately)
/// equal Euclidean length on uniform-weight images. Costs are reported
/// per probe along with the analytic line lengths so the anisotropy ratios
/// compare per unit length.
struct MetricationProbe {
  double gc_axis_cost = 0.0;
  double gc_diag_cost = 0.0;
  double ccmf_axis_energy = 0.0;  // 2 lambda^T g^2
  double ccmf_diag_energy = 0.0;
  double axis_length = 0.0;
  double diag_length = 0.0;

  double gc_anisotropy() const { return (gc_diag_cost / diag_length) / (gc_axis_cost / axis_length); }
  double ccmf_anisotropy() const {
    return (ccmf_diag_energy / diag_length) / (ccmf_axis_energy / axis_length);
  }
};

/// Builds both probe instances at cut length L (>= 8) and solves them with
/// the classical and CCMF solvers.
MetricationProbe metrication_probe(int length);

struct AtCmfTraceSample {
  int iteration;
  double p_min;
  double p_max;
  int near_binary_count;  // pixels with |P - 0.5| >= 0.4
};

/// Potential / flow pair of the PDE iteration.
struct AtCmfResult {
  Vector potential;  // per pixel
  Vector flow;       // per lattice edge
  std::vector<AtCmfTraceSample> trace;
};

/// Explicit forward-Euler iteration of the coupled potential/flow system:
///   P <- P - tau A^T F,   F <- F + tau A P,
/// then per-node projection of the axis-grouped capacity constraint
///   max_x F^2 + max_y F^2 (+ max_z F^2) <= g^2
/// by radially scaling the incident flows, with seed potentials pinned to
/// 1 (foreground) and 0 (background) every step. tau = 1/sqrt(d).
/// No convergence criterion exists for this scheme; it runs for the given
/// iteration budget and reports the oscillation trace.
AtCmfResult at_cmf_solve(const Extents& extents, const Vector& capacity,
                         const std::vector<std::uint8_t>& seeds, int iterations);

}  // namespace ccmf

#endif
