#pragma once

#include <cstdint>
#include <vector>

#include "uaf/problems.hpp"

namespace uaf {

struct BaselineRecord {
  int iter = 0;  // epoch for SVRG, iteration for GD
  double f = 0.0;
  long grad_evals = 0;  // component gradients for SVRG, full gradients for GD
  double wall_s = 0.0;
};

struct BaselineResult {
  Vec solution;
  std::vector<BaselineRecord> trace;
};

struct SvrgConfig {
  double learning_rate = 0.1;
  int epoch_length = 0;  // 0 means 2n
  int epochs = 50;
  std::uint64_t rng_seed = 1;
};

/// SVRG with the last inner iterate as the next snapshot. Throws step_size when
/// f rises above 10 f(x0).
BaselineResult run_svrg(const LogisticObjective& objective, const SvrgConfig& cfg, const Vec& x0);

/// Proximal gradient descent x <- prox_l(x - step grad g(x), step).
BaselineResult run_gd(const ObjectiveOracle& oracle, double step, int iters, const Vec& x0);

}  // namespace uaf
