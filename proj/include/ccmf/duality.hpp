#ifndef CCMF_DUALITY_HPP
#define CCMF_DUALITY_HPP

#include <cstdint>
#include <vector>

#include "ccmf/graph.hpp"

namespace ccmf {

/// A node labeling together with its thresholded binary form.
struct Labeling {
  Vector values;                    // gauge-shifted nu (sink at 0)
  std::vector<std::uint8_t> mask;   // 1 = source side
  double threshold;
};

/// Dual objective in summation form:
///   sum_i lambda_i g_i^2
///   + 1/4 sum_{edges != st} (nu_i - nu_j)^2 / (lambda_i + lambda_j)
///   + 1/4 (nu_s - nu_t - 1)^2 / (lambda_s + lambda_t).
/// Denominators are floored at 1e-12. Throws InvalidArgumentError if any
/// lambda is negative or all are zero.
double dual_energy(const TransportGraph& graph, const Vector& lambda, const Vector& nu);

/// Nodes whose incident-flow norm meets the capacity:
/// { i : g_i^2 - |A^T|_i F^2 <= tol * g_i^2 }.
std::vector<int> saturated_nodes(const TransportGraph& graph, const Vector& flow,
                                 double tol = 1e-6);

/// Shifts nu so the sink sits at 0, then labels nodes with nu >= threshold
/// as source side.
Labeling threshold_nu(const TransportGraph& graph, const Vector& nu,
                      double threshold = 0.5);

/// Combinatorial total variation sum_i g_i sqrt(sum_{e_ij} (u_i - u_j)^2),
/// evaluated on the graph deprived of the st edge (objective only, no
/// optimization).
double ctv_energy(const TransportGraph& graph, const Vector& u);

struct WeakDualityCheck {
  double flow_value;  // F_st = c^T F
  double ctv_value;   // g^T sqrt(|A^T| (Au)^2), st edge excluded
  bool holds;         // flow_value <= ctv_value + 1e-9
};

/// Checks F_st <= CTV(u) for a feasible flow and a unit-gap labeling
/// (u_s - u_t = 1). Throws InvalidArgumentError when F is infeasible
/// (divergence or capacity beyond 1e-6) or the gap constraint is violated.
WeakDualityCheck check_weak_duality(const TransportGraph& graph, const Vector& flow,
                                    const Vector& u);

/// Smallest CTV over all binary labelings with u[source] = 1, u[sink] = 0;
/// exhaustive over the 2^(n-2) assignments, so only for small graphs.
double min_binary_ctv(const TransportGraph& graph);

/// Longest straight run of boundary cracks of a 2D mask: the maximal number
/// of consecutive collinear unit segments separating a foreground pixel from
/// a background one. A 45-degree boundary scores 1-2, an axis-aligned
/// segment its full length. Returns 0 for masks without fg/bg adjacency.
int max_axis_run(const Extents& extents, const std::vector<std::uint8_t>& mask);

}  // namespace ccmf

#endif
