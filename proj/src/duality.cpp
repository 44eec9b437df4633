#include "ccmf/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccmf/errors.hpp"

namespace ccmf {

namespace {
constexpr double kDivisionFloor = 1e-12;
}

double dual_energy(const TransportGraph& graph, const Vector& lambda, const Vector& nu) {
  const int n = graph.node_count;
  if (lambda.size() != n || nu.size() != n) throw DimensionError("dual vector length mismatch");
  if ((lambda.array() < 0.0).any()) throw InvalidArgumentError("lambda must be nonnegative");
  if (lambda.maxCoeff() <= 0.0)
    throw InvalidArgumentError("lambda is identically zero; every dual term divides by zero");

  double energy = lambda.dot(graph.capacity.cwiseProduct(graph.capacity));
  for (int e = 0; e < graph.edge_count(); ++e) {
    const auto& [i, j] = graph.edges[e];
    double denom = std::max(lambda[i] + lambda[j], kDivisionFloor);
    if (e == graph.st_edge) {
      double gap = nu[graph.source] - nu[graph.sink] - 1.0;
      energy += 0.25 * gap * gap / denom;
    } else {
      double diff = nu[i] - nu[j];
      energy += 0.25 * diff * diff / denom;
    }
  }
  return energy;
}

std::vector<int> saturated_nodes(const TransportGraph& graph, const Vector& flow, double tol) {
  IncidenceOperator ops = build_incidence(graph);
  Vector norm_sq = ops.abs_matrix.transpose() * flow.cwiseProduct(flow);
  std::vector<int> out;
  for (int i = 0; i < graph.node_count; ++i) {
    double cap_sq = graph.capacity[i] * graph.capacity[i];
    if (cap_sq - norm_sq[i] <= tol * cap_sq) out.push_back(i);
  }
  return out;
}

Labeling threshold_nu(const TransportGraph& graph, const Vector& nu, double threshold) {
  if (nu.size() != graph.node_count) throw DimensionError("nu length != node count");
  Labeling lab;
  lab.values = nu.array() - nu[graph.sink];
  lab.threshold = threshold;
  lab.mask.resize(graph.node_count);
  for (int i = 0; i < graph.node_count; ++i) lab.mask[i] = lab.values[i] >= threshold ? 1 : 0;
  return lab;
}

double ctv_energy(const TransportGraph& graph, const Vector& u) {
  if (u.size() != graph.node_count) throw DimensionError("u length != node count");
  Vector incident_sq = Vector::Zero(graph.node_count);
  for (int e = 0; e < graph.edge_count(); ++e) {
    if (e == graph.st_edge) continue;
    const auto& [i, j] = graph.edges[e];
    double diff = u[i] - u[j];
    incident_sq[i] += diff * diff;
    incident_sq[j] += diff * diff;
  }
  return graph.capacity.dot(incident_sq.cwiseSqrt());
}

WeakDualityCheck check_weak_duality(const TransportGraph& graph, const Vector& flow,
                                    const Vector& u) {
  if (flow.size() != graph.edge_count()) throw DimensionError("flow length != edge count");
  if (u.size() != graph.node_count) throw DimensionError("u length != node count");

  IncidenceOperator ops = build_incidence(graph);
  double div_norm = (ops.matrix.transpose() * flow).norm();
  Vector slack = ops.abs_matrix.transpose() * flow.cwiseProduct(flow) -
                 graph.capacity.cwiseProduct(graph.capacity);
  if (div_norm > 1e-6 || slack.maxCoeff() > 1e-6)
    throw InvalidArgumentError("flow is not feasible");
  double gap = u[graph.source] - u[graph.sink];
  if (std::abs(gap - 1.0) > 1e-9)
    throw InvalidArgumentError("labeling must satisfy u_s - u_t = 1");

  WeakDualityCheck check;
  check.flow_value = flow[graph.st_edge];
  check.ctv_value = ctv_energy(graph, u);
  check.holds = check.flow_value <= check.ctv_value + 1e-9;
  return check;
}

double min_binary_ctv(const TransportGraph& graph) {
  const int n = graph.node_count;
  std::vector<int> free_nodes;
  for (int v = 0; v < n; ++v)
    if (v != graph.source && v != graph.sink) free_nodes.push_back(v);
  if (free_nodes.size() > 24) throw InvalidArgumentError("exhaustive CTV limited to 24 free nodes");

  Vector u = Vector::Zero(n);
  u[graph.source] = 1.0;
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t combos = 1u << free_nodes.size();
  for (std::uint32_t bits = 0; bits < combos; ++bits) {
    for (std::size_t k = 0; k < free_nodes.size(); ++k)
      u[free_nodes[k]] = (bits >> k) & 1u ? 1.0 : 0.0;
    best = std::min(best, ctv_energy(graph, u));
  }
  return best;
}

int max_axis_run(const Extents& extents, const std::vector<std::uint8_t>& mask) {
  if (static_cast<int>(mask.size()) != extents.count())
    throw DimensionError("mask length != pixel count");
  if (extents.dims() != 2) throw InvalidArgumentError("boundary runs are defined for 2D masks");

  int best = 0;
  // Vertical cracks: between (x,y) and (x+1,y). A run extends in y while the
  // crack persists with the same polarity.
  for (int x = 0; x + 1 < extents.x; ++x) {
    int run = 0;
    int prev = 0;  // 0 none, +1 fg left, -1 fg right
    for (int y = 0; y < extents.y; ++y) {
      int a = mask[extents.index(x, y)] ? 1 : 0;
      int b = mask[extents.index(x + 1, y)] ? 1 : 0;
      int state = a == b ? 0 : (a ? 1 : -1);
      run = (state != 0 && state == prev) ? run + 1 : (state != 0 ? 1 : 0);
      prev = state;
      best = std::max(best, run);
    }
  }
  // Horizontal cracks: between (x,y) and (x,y+1), runs extend in x.
  for (int y = 0; y + 1 < extents.y; ++y) {
    int run = 0;
    int prev = 0;
    for (int x = 0; x < extents.x; ++x) {
      int a = mask[extents.index(x, y)] ? 1 : 0;
      int b = mask[extents.index(x, y + 1)] ? 1 : 0;
      int state = a == b ? 0 : (a ? 1 : -1);
      run = (state != 0 && state == prev) ? run + 1 : (state != 0 ? 1 : 0);
      prev = state;
      best = std::max(best, run);
    }
  }
  return best;
}

}  // namespace ccmf
