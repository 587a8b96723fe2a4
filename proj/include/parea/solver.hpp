#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "parea/field.hpp"
#include "parea/grid.hpp"

namespace parea {

enum class LinearSolver { Auto, Direct, ConjugateGradient };

struct SolveConfig {
  std::vector<double> epsilon_schedule = default_epsilon_schedule();
  /// Used only when the first solve at the largest epsilon fails.
  std::vector<double> sigma_schedule = {0.0, 0.25, 0.5, 0.75, 1.0};
  int newton_max_iters = 100;
  double newton_tol = 1e-9;  // sup-norm of the discrete Q_eps u - H
  double damping = 0.5;      // backtracking factor
  double linear_tol = 1e-12; // relative, conjugate-gradient only
  double tau_sing = -1.0;    // negative: default threshold in post-analysis
  /// Stop the epsilon sweep once consecutive p-areas differ by less than this.
  double stop_tol = 1e-3;
  LinearSolver linear_solver = LinearSolver::Auto;

  /// 2^0, 2^-1, ..., 2^-10.
  static std::vector<double> default_epsilon_schedule();
  void validate() const;
};

struct StageDiagnostics {
  double epsilon = 0.0;
  double sigma = 1.0;
  int iterations = 0;
  double residual = 0.0;
  double sup_u = 0.0;
  double sup_grad_u = 0.0;
  double regularized_area = 0.0;
  double p_area = 0.0;           // node quadrature
  double discrete_p_area = 0.0;  // the solver's own discretization at eps = 0
  bool converged = false;
  /// Discrete energy after each accepted Newton step (first entry: initial guess).
  std::vector<double> energy_history;
};

struct SolveResult {
  explicit SolveResult(ScalarFieldGrid u0) : u(std::move(u0)) {}

  ScalarFieldGrid u;
  std::vector<StageDiagnostics> stages;
  bool converged = false;
  int failed_stage = -1;
  std::string message;
};

std::string to_json(const SolveResult& r);

/// Discrete energy sum_simplices w sqrt(eps^2 + |g + sigma F(c)|^2) + h^m sum H u.
///
/// Every lattice cell with all corners active contributes one simplex per
/// corner (the corner and its axis neighbours in the cell). The simplex stands
/// for the quarter cell at that corner: w is the quarter's volume inside the
/// domain and F is taken at the simplex centroid. When phi is given, an edge
/// from an interior node across the boundary ends at the crossing point with
/// value sigma * phi there; otherwise band values are used as they are.
double discrete_energy(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                       double eps, double sigma = 1.0, const BoundaryData* phi = nullptr);

/// discrete_energy at eps = 0, sigma = 1.
double discrete_p_area(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                       const BoundaryData* phi = nullptr);

/// -dE/du_i at interior nodes (zero elsewhere). This is the integrated flux
/// balance of N_eps over the dual cell, about h^m (div N_eps - H). eps = 0 is
/// allowed here; simplices with g + sigma F = 0 then contribute no flux.
ScalarFieldGrid flux_residual(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                              const CurvatureSpec& H, double eps, double sigma = 1.0,
                              const BoundaryData* phi = nullptr);

/// div N_eps - H at interior nodes by flux differences of N_eps at half nodes.
/// At the half node between i and i + e_a, p_a is the one-sided difference,
/// the other components average the central differences at both ends, and
/// F is taken at the half node. eps = 0 is allowed (N := 0 where p = 0).
ScalarFieldGrid pde_residual(const ScalarFieldGrid& u, const VectorFieldSpec& F,
                             const CurvatureSpec& H, double eps = 0.0, double sigma = 1.0);

struct Assembly {
  /// pde_residual: the half-node flux form of Q_{eps,sigma} u - H.
  ScalarFieldGrid residual;
  /// Row k: a_IJ at interior node k (column-major m x m), from central
  /// differences and sigma F at the node.
  Eigen::MatrixXd a;
  /// b at interior node k.
  Eigen::VectorXd b;
  /// grad u + sigma F at interior node k (column k).
  Eigen::MatrixXd p;
};

Assembly assemble(const ScalarFieldGrid& u, const VectorFieldSpec& F, const CurvatureSpec& H,
                  double eps, double sigma = 1.0);

/// Damped Newton on the discrete energy, starting from the interior values of
/// u0 (boundary band already set). Non-convergence is reported, not thrown.
SolveResult newton_solve(const ScalarFieldGrid& u0, const VectorFieldSpec& F,
                         const CurvatureSpec& H, double eps, double sigma,
                         const SolveConfig& config, const BoundaryData* phi = nullptr);

/// sigma-continuation (only if needed) at the first epsilon, then the epsilon
/// sweep warm-started from each previous stage.
SolveResult continuation_solve(const DomainSpec& domain, double h, const VectorFieldSpec& F,
                               const CurvatureSpec& H, const BoundaryData& phi,
                               const SolveConfig& config);

struct ComparisonReport {
  double max_u_minus_v = 0.0;
  double max_abs_diff = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// u <= v up to 10 * newton_tol over interior nodes.
ComparisonReport comparison_harness(const ScalarFieldGrid& u, const ScalarFieldGrid& v,
                                    double newton_tol);

}  // namespace parea
