#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "uaf/uaf.hpp"

namespace uaf {

/// Uniform convexity (s, sigma) of f and the inner rate
/// f(A_m(y)) - f* <= c_A ||y - x*||^v / m^r.
struct RestartConfig {
  double s = 2.0;
  double sigma = 1.0;
  double v = 2.0;
  double r = 2.0;
  double c_A = 1.0;
  double R = 1.0;
  int K = 8;

  void validate() const;
};

int restart_m0(const RestartConfig& cfg);
/// Epoch after which every epoch runs a single inner iteration; nullopt when s >= v.
std::optional<int> restart_k0(const RestartConfig& cfg);
std::vector<int> epoch_schedule(const RestartConfig& cfg);

/// Scale G = (sigma^v / (s^v c_A^s))^{1/(v-s)} of the superlinear phase (s < v).
double superlinear_scale(const RestartConfig& cfg);

/// Runs m iterations of the inner method from warm start y.
using InnerSolver = std::function<Vec(const Vec& y, int m)>;

struct EpochRecord {
  int k = 0;
  int m = 0;  // inner iterations that produced y_k (0 for y_0)
  double f = 0.0;
};

struct RestartResult {
  Vec solution;
  std::vector<EpochRecord> epochs;
  int total_inner = 0;
};

RestartResult run_restarted(const InnerSolver& inner, const RestartConfig& cfg, const Vec& x0,
                            const std::function<double(const Vec&)>& objective);

struct RateConstants {
  double c_A = 0.0;
  double r = 0.0;
  double v = 0.0;
};

RateConstants uaf_rate_constants(const UafConfig& cfg);

/// Inner solver running the engine for m iterations (max_iter is overridden).
InnerSolver uaf_inner_solver(const ObjectiveOracle& oracle, UafConfig cfg);

}  // namespace uaf
