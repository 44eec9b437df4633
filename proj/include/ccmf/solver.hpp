#ifndef CCMF_SOLVER_HPP
#define CCMF_SOLVER_HPP

#include <memory>
#include <string>
#include <vector>

#include "ccmf/graph.hpp"

namespace ccmf {

/// Parameters of the primal-dual interior-point iteration.
struct SolverConfig {
  double mu = 10.0;          // barrier multiplier, > 1
  double eps_primal = 1e-6;  // ||A^T F||_2 threshold
  double eps_dual = 1e-6;    // ||r_d||_2 threshold
  double eps_gap = 1e-6;     // surrogate gap threshold
  int max_iters = 200;
  double ls_alpha = 0.01;  // Armijo fraction, in (0, 0.5)
  double ls_beta = 0.5;    // backtracking factor, in (0, 1)
  double init_lambda = 1.0;
  std::string trace_path;  // per-iteration CSV written when non-empty

  /// Tight tolerances (1e-6 across the board).
  static SolverConfig strict();
  /// The loose thresholds used for imaging runs: ||r_d|| < 1, gap < 2.
  static SolverConfig paper_practical();

  void validate() const;  // throws InvalidArgumentError
};

/// Primal iterate: signed flow per edge plus the objective value c^T F.
struct FlowState {
  Vector flow;     // length m
  double st_flow;  // flow[st_edge]
};

/// Dual iterate: lambda >= 0 marks saturated (cut) nodes, nu is the
/// near-binary potential whose threshold yields the segmentation
/// (nu_source - nu_sink ~ 1 at the optimum).
struct DualState {
  Vector lambda;
  Vector nu;
};

struct IterationRecord {
  int iteration;
  double dual_residual_norm;
  double primal_residual_norm;
  double surrogate_gap;
  double step_length;
};

enum class Termination { Converged, MaxIterations, LineSearchStall };

struct SolveReport {
  int iterations = 0;
  std::vector<IterationRecord> history;
  double wall_seconds = 0.0;
  Termination reason = Termination::Converged;
  bool converged = false;
};

struct SolveResult {
  FlowState flow;
  DualState dual;
  SolveReport report;
};

/// Residuals of the Newton iteration, which runs on the minimization form
/// min -c^T F (so the dual residual carries -c; its iterate nu is the
/// negation of the reported dual potential).
struct Residuals {
  Vector dual;     // length m: Df(F)^T lambda + A nu - c
  Vector central;  // length n: -diag(lambda) f(F) - 1/t
  Vector primal;   // length n: A^T F
};

/// The full modified-KKT Newton system: matrix is (m+2n) square with the
/// block layout
///   [ 2 diag(|A| lambda)      Df(F)^T      A ]
///   [ -diag(lambda) Df(F)   -diag(f(F))    0 ]
///   [ A^T                        0         0 ]
/// and rhs = -[r_d; r_c; r_p]. The matrix has a one-dimensional null space
/// (nu is defined up to a constant); anchored() pins nu at the sink by
/// adding 1 to the diagonal entry of the sink's primal row, which makes the
/// solution unique with delta_nu[sink] == 0 while still satisfying every
/// original equation.
struct KktSystem {
  SparseMatrix matrix;
  Vector rhs;
  int flow_vars;  // m
  int node_vars;  // n
  int sink;

  SparseMatrix anchored() const;
};

struct NewtonDirection {
  Vector flow;    // length m
  Vector lambda;  // length n
  Vector nu;      // length n, entry at the sink is exactly 0
};

/// Precomputed operators for one transport graph; shared by all solver
/// entry points. Immutable and safe to use from several threads.
class CcmfProblem {
 public:
  explicit CcmfProblem(const TransportGraph& graph);

  const TransportGraph& graph() const { return graph_; }
  const IncidenceOperator& ops() const { return ops_; }
  const SourceSinkIndicator& indicator() const { return indicator_; }

  /// f(F) = |A^T| F^2 - g^2.
  Vector constraint_values(const Vector& flow) const;

  /// Residuals of the modified KKT conditions at barrier parameter t.
  /// Requires a strictly interior point (lambda > 0, f(F) < 0).
  Residuals residuals(const Vector& flow, const Vector& lambda, const Vector& nu,
                      double t_barrier) const;

  KktSystem assemble_kkt(const Vector& flow, const Vector& lambda, const Vector& nu,
                         double t_barrier) const;

  /// Solves the Newton system exactly by eliminating the flow and lambda
  /// blocks down to a symmetric positive definite system on (lambda, nu),
  /// factorized with a sparse LDLT. One iterative-refinement pass keeps the
  /// direction accurate to ~1e-12 relative. Throws SingularSystemError if
  /// the factorization fails even after a small diagonal regularization.
  NewtonDirection newton_step(const Vector& flow, const Vector& lambda, const Vector& nu,
                              double t_barrier) const;

  /// Standard backtracking: start from the fraction-to-boundary cap on
  /// lambda, shrink until f(F) stays strictly interior and the combined
  /// residual norm satisfies the Armijo decrease. Returns the step, or
  /// throws a stall below 1e-12. A zero direction returns 1.
  double line_search(const Vector& flow, const Vector& lambda, const Vector& nu,
                     const NewtonDirection& direction, double t_barrier,
                     const SolverConfig& config) const;

 private:
  TransportGraph graph_;
  IncidenceOperator ops_;
  SourceSinkIndicator indicator_;
  Vector capacity_sq_;
};

/// Runs the interior-point iteration from F = 0, lambda = init_lambda,
/// nu = 0 until all three convergence tests pass or the iteration budget
/// runs out. Non-convergence is reported in the result, never thrown.
/// The reported nu is oriented for interpretation (source above sink);
/// the iteration-frame residual functions take its negation.
SolveResult solve(const CcmfProblem& problem, const SolverConfig& config);
SolveResult solve(const TransportGraph& graph, const SolverConfig& config);

/// Convenience wrappers matching the one-shot call style used in tests.
Vector constraint_values(const TransportGraph& graph, const Vector& flow);
Residuals residuals(const TransportGraph& graph, const Vector& flow, const Vector& lambda,
                    const Vector& nu, double t_barrier);

}  // namespace ccmf

#endif
