#include "ccmf/solver.hpp"

#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "ccmf/errors.hpp"

namespace ccmf {

SolverConfig SolverConfig::strict() {
  SolverConfig c;
  c.eps_primal = 1e-6;
  c.eps_dual = 1e-6;
  c.eps_gap = 1e-6;
  c.max_iters = 200;
  return c;
}

SolverConfig SolverConfig::paper_practical() {
  SolverConfig c;
  c.eps_primal = 1.0;
  c.eps_dual = 1.0;
  c.eps_gap = 2.0;
  c.max_iters = 100;
  return c;
}

void SolverConfig::validate() const {
  if (!(mu > 1.0)) throw InvalidArgumentError("mu must exceed 1");
  if (!(eps_primal > 0.0 && eps_dual > 0.0 && eps_gap > 0.0))
    throw InvalidArgumentError("tolerances must be positive");
  if (max_iters < 1) throw InvalidArgumentError("max_iters must be at least 1");
  if (!(ls_alpha > 0.0 && ls_alpha < 0.5)) throw InvalidArgumentError("ls_alpha must be in (0, 0.5)");
  if (!(ls_beta > 0.0 && ls_beta < 1.0)) throw InvalidArgumentError("ls_beta must be in (0, 1)");
  if (!(init_lambda > 0.0)) throw InvalidArgumentError("init_lambda must be positive");
}

CcmfProblem::CcmfProblem(const TransportGraph& graph)
    : graph_(graph),
      ops_(build_incidence(graph)),
      indicator_(source_sink_indicator(graph)),
      capacity_sq_(graph.capacity.cwiseProduct(graph.capacity)) {}

Vector CcmfProblem::constraint_values(const Vector& flow) const {
  if (flow.size() != graph_.edge_count()) throw DimensionError("flow length != edge count");
  return ops_.abs_matrix.transpose() * flow.cwiseProduct(flow) - capacity_sq_;
}

namespace {

void require_interior(const Vector& lambda, const Vector& constraints) {
  if ((lambda.array() <= 0.0).any())
    throw InvalidArgumentError("lambda must be strictly positive at an interior point");
  if ((constraints.array() >= 0.0).any())
    throw InvalidArgumentError("capacity constraints must be strictly satisfied");
}

}  // namespace

Residuals CcmfProblem::residuals(const Vector& flow, const Vector& lambda, const Vector& nu,
                                 double t_barrier) const {
  const int m = graph_.edge_count();
  const int n = graph_.node_count;
  if (flow.size() != m || lambda.size() != n || nu.size() != n)
    throw DimensionError("iterate dimensions do not match the graph");
  if (!(t_barrier > 0.0)) throw InvalidArgumentError("barrier parameter must be positive");

  Vector constraints = constraint_values(flow);
  require_interior(lambda, constraints);

  // Dual residual of the Newton iteration, which runs on min -c^T F (the
  // objective gradient is -c): r_d = Df(F)^T lambda + A nu - c, where
  // Df(F)^T lambda has edge entries 2 F_e (lambda_tail + lambda_head).
  Vector lam_sum = ops_.abs_matrix * lambda;  // per edge: lambda_i + lambda_j
  Residuals r;
  r.dual = 2.0 * flow.cwiseProduct(lam_sum) + ops_.matrix * nu - indicator_.st_selector;
  r.central = -lambda.cwiseProduct(constraints).array() - 1.0 / t_barrier;
  r.primal = ops_.matrix.transpose() * flow;
  return r;
}

KktSystem CcmfProblem::assemble_kkt(const Vector& flow, const Vector& lambda, const Vector& nu,
                                    double t_barrier) const {
  const int m = graph_.edge_count();
  const int n = graph_.node_count;
  Residuals r = residuals(flow, lambda, nu, t_barrier);
  Vector constraints = constraint_values(flow);
  Vector lam_sum = ops_.abs_matrix * lambda;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(9 * m + n));
  for (int e = 0; e < m; ++e) {
    const auto& [tail, head] = graph_.edges[e];
    double df = 2.0 * flow[e];  // dfi/dFe for both incident nodes
    entries.emplace_back(e, e, 2.0 * lam_sum[e]);  // sum_i lambda_i Hess f_i
    // Df(F)^T block (m x n) and A block (m x n).
    entries.emplace_back(e, m + tail, df);
    entries.emplace_back(e, m + head, df);
    entries.emplace_back(e, m + n + tail, 1.0);
    entries.emplace_back(e, m + n + head, -1.0);
    // -diag(lambda) Df(F) block (n x m).
    entries.emplace_back(m + tail, e, -lambda[tail] * df);
    entries.emplace_back(m + head, e, -lambda[head] * df);
    // A^T block (n x m).
    entries.emplace_back(m + n + tail, e, 1.0);
    entries.emplace_back(m + n + head, e, -1.0);
  }
  for (int i = 0; i < n; ++i) entries.emplace_back(m + i, m + i, -constraints[i]);

  KktSystem sys;
  sys.matrix.resize(m + 2 * n, m + 2 * n);
  sys.matrix.setFromTriplets(entries.begin(), entries.end());
  sys.rhs.resize(m + 2 * n);
  sys.rhs << -r.dual, -r.central, -r.primal;
  sys.flow_vars = m;
  sys.node_vars = n;
  sys.sink = graph_.sink;
  return sys;
}

SparseMatrix KktSystem::anchored() const {
  SparseMatrix anchored = matrix;
  int k = flow_vars + node_vars + sink;
  anchored.coeffRef(k, k) += 1.0;
  return anchored;
}

namespace {

// Reduced Newton system on (delta_lambda, delta_nu). Eliminating delta_F
// through the diagonal flow Hessian and rescaling the central rows by
// -1/lambda leaves
//   [ D H^-1 D^T + diag(-f/lambda)    D H^-1 A        ] [dl]   [b_l]
//   [ A^T H^-1 D^T                    A^T H^-1 A + E  ] [dn] = [b_n]
// with H = 2 diag(|A| lambda), D = Df(F), and E the gauge anchor at the
// sink. The matrix is symmetric positive definite and couples only node
// pairs sharing an edge, so a sparse Cholesky stays cheap even in 3D.
struct ReducedSystem {
  SparseMatrix matrix;  // 2n x 2n, lambda block first
  Vector rhs;
};

ReducedSystem build_reduced(const TransportGraph& graph, const Vector& flow,
                            const Vector& lambda, const Vector& constraints,
                            const Vector& lam_sum, const Residuals& r) {
  const int m = graph.edge_count();
  const int n = graph.node_count;

  Vector h(m);
  for (int e = 0; e < m; ++e) h[e] = 2.0 * lam_sum[e];

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(16 * m + 2 * n));
  auto add = [&entries](int row, int col, double v) { entries.emplace_back(row, col, v); };

  for (int e = 0; e < m; ++e) {
    const auto& [u, v] = graph.edges[e];
    double inv_h = 1.0 / h[e];
    double df = 2.0 * flow[e];
    double ll = df * df * inv_h;  // lambda-lambda coupling through edge e
    add(u, u, ll);
    add(v, v, ll);
    add(u, v, ll);
    add(v, u, ll);
    double ln = df * inv_h;  // lambda-nu coupling: D row entries times A columns
    add(u, n + u, ln);
    add(u, n + v, -ln);
    add(v, n + u, ln);
    add(v, n + v, -ln);
    add(n + u, u, ln);
    add(n + u, v, ln);
    add(n + v, u, -ln);
    add(n + v, v, -ln);
    add(n + u, n + u, inv_h);  // weighted Laplacian
    add(n + v, n + v, inv_h);
    add(n + u, n + v, -inv_h);
    add(n + v, n + u, -inv_h);
  }
  for (int i = 0; i < n; ++i) add(i, i, -constraints[i] / lambda[i]);
  add(n + graph.sink, n + graph.sink, 1.0);  // gauge anchor

  ReducedSystem sys;
  sys.matrix.resize(2 * n, 2 * n);
  sys.matrix.setFromTriplets(entries.begin(), entries.end());

  // b_l = -r_c ./ lambda - D H^-1 r_d ; b_n = r_p - A^T H^-1 r_d.
  Vector y = r.dual.cwiseQuotient(h);
  Vector b_l = -r.central.cwiseQuotient(lambda);
  Vector b_n = r.primal;
  for (int e = 0; e < m; ++e) {
    const auto& [u, v] = graph.edges[e];
    double df = 2.0 * flow[e];
    b_l[u] -= df * y[e];
    b_l[v] -= df * y[e];
    b_n[u] -= y[e];
    b_n[v] += y[e];
  }
  sys.rhs.resize(2 * n);
  sys.rhs << b_l, b_n;
  return sys;
}

}  // namespace

NewtonDirection CcmfProblem::newton_step(const Vector& flow, const Vector& lambda,
                                         const Vector& nu, double t_barrier) const {
  const int m = graph_.edge_count();
  const int n = graph_.node_count;
  Residuals r = residuals(flow, lambda, nu, t_barrier);
  Vector constraints = constraint_values(flow);
  Vector lam_sum = ops_.abs_matrix * lambda;

  ReducedSystem sys = build_reduced(graph_, flow, lambda, constraints, lam_sum, r);

  Eigen::SimplicialLDLT<SparseMatrix> factor;
  factor.compute(sys.matrix);
  if (factor.info() != Eigen::Success) {
    // One regularized retry; a second failure means the iterate degenerated.
    SparseMatrix reg = sys.matrix;
    for (int i = 0; i < 2 * n; ++i) reg.coeffRef(i, i) += 1e-10;
    factor.compute(reg);
    if (factor.info() != Eigen::Success)
      throw SingularSystemError("reduced KKT system could not be factorized");
  }
  Vector x = factor.solve(sys.rhs);
  // One refinement pass tightens the direction well below the 1e-9 gate.
  Vector correction = factor.solve(sys.rhs - sys.matrix * x);
  x += correction;

  NewtonDirection d;
  d.lambda = x.head(n);
  d.nu = x.tail(n);
  // The KKT equations are invariant under constant shifts of nu, so the
  // gauge can be pinned exactly rather than to roundoff.
  d.nu.array() -= d.nu[graph_.sink];
  // Back-substitute delta_F = H^-1 (-r_d - D^T dl - A dn).
  d.flow.resize(m);
  for (int e = 0; e < m; ++e) {
    const auto& [u, v] = graph_.edges[e];
    double df = 2.0 * flow[e];
    double rhs = -r.dual[e] - df * (d.lambda[u] + d.lambda[v]) - (d.nu[u] - d.nu[v]);
    d.flow[e] = rhs / (2.0 * lam_sum[e]);
  }
  return d;
}

namespace {

double residual_norm(const Residuals& r) {
  return std::sqrt(r.dual.squaredNorm() + r.central.squaredNorm() + r.primal.squaredNorm());
}

}  // namespace

double CcmfProblem::line_search(const Vector& flow, const Vector& lambda, const Vector& nu,
                                const NewtonDirection& direction, double t_barrier,
                                const SolverConfig& config) const {
  double dir_norm = direction.flow.norm() + direction.lambda.norm() + direction.nu.norm();
  if (dir_norm == 0.0) return 1.0;

  // Fraction-to-boundary cap keeps lambda strictly positive.
  double s = 1.0;
  for (int i = 0; i < lambda.size(); ++i)
    if (direction.lambda[i] < 0.0) s = std::min(s, -lambda[i] / direction.lambda[i]);
  s = std::min(1.0, 0.99 * s);

  double base_norm = residual_norm(residuals(flow, lambda, nu, t_barrier));
  while (s >= 1e-12) {
    Vector f_new = flow + s * direction.flow;
    Vector lam_new = lambda + s * direction.lambda;
    Vector constraints = constraint_values(f_new);
    if ((constraints.array() < 0.0).all() && (lam_new.array() > 0.0).all()) {
      Vector nu_new = nu + s * direction.nu;
      Residuals r = residuals(f_new, lam_new, nu_new, t_barrier);
      if (residual_norm(r) <= (1.0 - config.ls_alpha * s) * base_norm) return s;
    }
    s *= config.ls_beta;
  }
  throw LineSearchStallError("line search stalled below 1e-12");
}

SolveResult solve(const CcmfProblem& problem, const SolverConfig& config) {
  config.validate();
  const TransportGraph& graph = problem.graph();
  const int m = graph.edge_count();
  const int n = graph.node_count;

  auto t_start = std::chrono::steady_clock::now();

  Vector flow = Vector::Zero(m);
  Vector lambda = Vector::Constant(n, config.init_lambda);
  Vector nu = Vector::Zero(n);

  SolveReport report;
  report.reason = Termination::MaxIterations;

  std::ofstream trace;
  if (!config.trace_path.empty()) {
    trace.open(config.trace_path);
    trace << "iter,r_d,r_p,gap,step\n";
  }

  auto dual_primal_norms = [&](double* r_d, double* r_p) {
    Vector lam_sum = problem.ops().abs_matrix * lambda;
    Vector dual = 2.0 * flow.cwiseProduct(lam_sum) + problem.ops().matrix * nu -
                  problem.indicator().st_selector;
    *r_d = dual.norm();
    *r_p = (problem.ops().matrix.transpose() * flow).norm();
  };

  double gap = -problem.constraint_values(flow).dot(lambda);
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    double t_barrier = config.mu * static_cast<double>(n) / gap;

    NewtonDirection direction;
    double step = 0.0;
    try {
      direction = problem.newton_step(flow, lambda, nu, t_barrier);
      step = problem.line_search(flow, lambda, nu, direction, t_barrier, config);
    } catch (const Error&) {  // singular system or stalled line search;
      // the iterate is untouched, so the reported state is the best reached.
      double r_d, r_p;
      dual_primal_norms(&r_d, &r_p);
      report.history.push_back({iter, r_d, r_p, gap, 0.0});
      report.iterations = iter;
      report.reason = Termination::LineSearchStall;
      break;
    }

    flow += step * direction.flow;
    lambda += step * direction.lambda;
    nu += step * direction.nu;

    gap = -problem.constraint_values(flow).dot(lambda);
    double r_d, r_p;
    dual_primal_norms(&r_d, &r_p);

    report.history.push_back({iter, r_d, r_p, gap, step});
    report.iterations = iter;
    if (trace.is_open())
      trace << iter << ',' << r_d << ',' << r_p << ',' << gap << ',' << step << '\n';

    if (r_p <= config.eps_primal && r_d <= config.eps_dual && gap <= config.eps_gap) {
      report.reason = Termination::Converged;
      report.converged = true;
      break;
    }
  }

  auto t_end = std::chrono::steady_clock::now();
  report.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();

  SolveResult result;
  result.flow.flow = flow;
  result.flow.st_flow = flow[graph.st_edge];
  result.dual.lambda = lambda;
  // The iteration carries the minimization-frame multiplier; the reported
  // potential is its negation, oriented so the source sits one above the
  // sink (the thresholdable labeling).
  result.dual.nu = -nu;
  result.report = report;
  return result;
}

SolveResult solve(const TransportGraph& graph, const SolverConfig& config) {
  return solve(CcmfProblem(graph), config);
}

Vector constraint_values(const TransportGraph& graph, const Vector& flow) {
  return CcmfProblem(graph).constraint_values(flow);
}

Residuals residuals(const TransportGraph& graph, const Vector& flow, const Vector& lambda,
                    const Vector& nu, double t_barrier) {
  return CcmfProblem(graph).residuals(flow, lambda, nu, t_barrier);
}

}  // namespace ccmf
