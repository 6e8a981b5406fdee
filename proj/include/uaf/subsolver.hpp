#pragma once

#include "uaf/taylor.hpp"

namespace uaf {

/// One regularized model step: minimize model(x) + reg_coeff * ||x - center||^power
/// where center is the model's expansion point.
struct StepSpec {
  const TaylorModel* model = nullptr;
  double reg_coeff = 1.0;
  double power = 2.0;
};

struct StepResult {
  Vec x_new;
  double displacement_norm = 0.0;
  double stationarity_residual = 0.0;
  int inner_iterations = 0;
  bool converged = true;
};

/// Order-1 model, power 2: x = prox_l(c - g / (2M), 1 / (2M)).
StepResult prox_gradient_step(const StepSpec& spec);

/// Global minimizer of <g,u> + 1/2 u^T H u + M ||u||^3 through the secular
/// equation on the eigenbasis of H. Requires l == 0 and d <= cap.
StepResult cubic_step_exact(const StepSpec& spec, int cap = 64);

/// Lanczos-projected cubic step; stops once the lifted residual is below
/// tol * (1 + ||g||) or the subspace reaches max_krylov_dim.
StepResult cubic_step_krylov(const StepSpec& spec, int max_krylov_dim, double tol);

/// Damped Newton with CG inner solves for power in [2, 3]. The returned step has
/// stationarity_residual < inner_tol * (1 + ||g||); otherwise InnerSolverError.
StepResult power_step_generic(const StepSpec& spec, double inner_tol, int max_iter = 500);

/// Same secular solver as cubic_step_exact, for any power in [2, 3].
StepResult power_step_exact(const StepSpec& spec, int cap = 64);

/// Same Lanczos scheme as cubic_step_krylov, for any power in [2, 3].
StepResult power_step_krylov(const StepSpec& spec, int max_krylov_dim, double tol);

enum class SubsolverKind { automatic, exact, krylov, generic };

struct SubsolverOptions {
  SubsolverKind kind = SubsolverKind::automatic;
  int exact_cap = 64;
  int max_krylov_dim = 200;
  double tol = 1e-10;
};

/// Picks a solver from the model order, power, composite part and dimension.
StepResult solve_step(const StepSpec& spec, const SubsolverOptions& options = {});

/// Value of model(x) + M ||x - c||^power, including l.
double regularized_model_value(const StepSpec& spec, const Vec& x);

/// ||grad model(x) + M power ||u||^{power-2} u|| for l == 0 (u = x - c).
double regularized_model_residual(const StepSpec& spec, const Vec& x);

}  // namespace uaf
