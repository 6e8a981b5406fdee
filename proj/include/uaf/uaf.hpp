#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uaf/subsolver.hpp"

namespace uaf {

enum class Strategy { ExactQEqualsPNu, Heuristic, Bisection };
enum class ViolationPolicy { warn, fallback };

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct UafConfig {
  int p = 2;
  double nu = 1.0;
  double L = 1.0;
  double q = 3.0;
  double alpha = 1.0;
  double theta1 = 1.0;
  double theta2 = 1.0;
  /// Uniform-convexity constants of the proxy and of (1/q)||.||^q. Unset means
  /// 2^{2-q}, the values for h(x; x0) = (1/q)||x - x0||_2^q.
  std::optional<double> gamma;
  std::optional<double> beta;
  Strategy strategy = Strategy::ExactQEqualsPNu;

  /// Estimate of h(x*; x0) used by the heuristic schedule. When unset the engine
  /// runs pilot_iters iterations of the q = p + nu instance and uses its final
  /// iterate in place of x*.
  std::optional<double> h_star_estimate;
  int pilot_iters = 50;
  ViolationPolicy violation_policy = ViolationPolicy::warn;
  double bracket_growth = 2.0;

  int max_iter = 100;
  /// Optional early stop once f(x_i) - f_ref <= stop_gap.
  std::optional<double> stop_gap;
  std::optional<double> f_ref;
  SubsolverOptions subsolver;

  double gamma_value() const;
  double beta_value() const;
  double c_q() const;
  double varsigma() const;
  double pnu() const { return p + nu; }

  /// Throws invalid_config describing the first violated constraint.
  void validate() const;
};

/// Multiplier M on ||x - x_hat||^varsigma in the tensor step.
double step_multiplier(const UafConfig& cfg, double lambda);

/// (1/q)||x - x0||_2^q.
double proxy_value(const Vec& x, const Vec& x0, double q);

struct IterateState {
  int i = 0;
  Vec x;
  Vec z;
  double A = 0.0;
  double a = 0.0;
  double lambda = 0.0;
  double omega = 0.0;
  Vec grad_aggregate;
  Vec x_hat;
};

struct CoefficientPair {
  double a = 0.0;
  double lambda = 0.0;
};

/// Solves L a^q = target c_q gamma (A_prev + a)^{q-1}; lambda = target / L.
CoefficientPair solve_a_exact(double A_prev, const UafConfig& cfg, double target);

/// Solves a^q = lambda c_q gamma (A_prev + a)^{q-1} for a > 0.
double a_from_lambda(double A_prev, double lambda, const UafConfig& cfg);

struct HeuristicCoefficients {
  double A = 0.0;
  double a = 0.0;
  double lambda = 0.0;
};

/// Constant C0 of the heuristic schedule.
double heuristic_c0(const UafConfig& cfg);
/// Closed-form A_i of the heuristic (A_0 = 0).
double heuristic_A(int i, const UafConfig& cfg, double h_star);
HeuristicCoefficients schedule_heuristic(int i, const UafConfig& cfg);
HeuristicCoefficients schedule_heuristic(int i, const UafConfig& cfg, double h_star);

/// Bracketing failure; last_displacement == 0 means the start point is stationary.
class BracketingError : public Error {
 public:
  BracketingError(const std::string& what, double last_displacement)
      : Error(Errc::bracketing, what), last_displacement_(last_displacement) {}
  double last_displacement() const { return last_displacement_; }

 private:
  double last_displacement_;
};

struct BisectionResult {
  double a = 0.0;
  double lambda = 0.0;
  double A = 0.0;
  double chi = 0.0;
  Vec x_hat;
  StepResult step;
  int probes = 0;
};

/// Finds lambda with theta1 <= chi(lambda) <= theta2 for the step out of `state`
/// (state.x = x_{i-1}, state.z = z_{i-1}, state.A = A_{i-1}), starting from seed_lambda.
BisectionResult find_lambda_bisection(const ObjectiveOracle& oracle, const UafConfig& cfg, const IterateState& state,
                                      double seed_lambda, double bracket_growth = 2.0);

/// argmin_x <s, x> + A l(x) + (1/q)||x - x0||_2^q.
Vec z_update(const Vec& s, const Vec& x0, double A, double q, const SimpleConvexTerm* composite);

struct IterationRecord {
  int i = 0;
  double f = 0.0;
  double omega = 0.0;
  double lambda = 0.0;
  double A = 0.0;
  double a = 0.0;
  double disp = 0.0;
  double wall_s = 0.0;
  int probes = 1;
  bool fallback = false;
};

struct RunResult {
  Vec solution;
  Vec best_x;
  double best_f = 0.0;
  std::vector<IterationRecord> trace;
  IterateState final_state;
  int indicator_violations = 0;
  bool converged = false;
  std::optional<double> h_star_used;
  std::vector<std::string> warnings;
};

RunResult run(const ObjectiveOracle& oracle, const UafConfig& cfg, const Vec& x0);

}  // namespace uaf
