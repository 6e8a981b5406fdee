#include "uaf/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace uaf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

BaselineResult run_svrg(const LogisticObjective& objective, const SvrgConfig& cfg, const Vec& x0) {
  const SparseDataset& data = objective.data();
  const std::size_t n = data.n();
  require(cfg.learning_rate > 0.0, Errc::invalid_argument, "svrg: learning rate must be positive");
  require(cfg.epochs >= 0 && cfg.epoch_length >= 0, Errc::invalid_argument, "svrg: negative budget");
  require(x0.size() == objective.dim(), Errc::dimension_mismatch, "svrg: x0 has wrong dimension");
  const long m = cfg.epoch_length > 0 ? cfg.epoch_length : static_cast<long>(2 * n);
  const double eta = cfg.learning_rate;
  const double ridge = objective.ridge();

  const auto t0 = Clock::now();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  BaselineResult out;
  Vec x = x0;
  const double f0 = objective.value(x0);
  const double limit = 10.0 * std::max(std::abs(f0), 1e-300);
  long evals = 0;
  out.trace.push_back({0, f0, 0, 0.0});
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Vec snapshot = x;
    const Vec mu = objective.gradient(snapshot);
    evals += static_cast<long>(n);
    for (long it = 0; it < m; ++it) {
      const std::size_t j = pick(rng);
      const double c = objective.sample_gradient_scale(j, x) - objective.sample_gradient_scale(j, snapshot);
      if (ridge > 0.0) {
        x -= eta * (mu + ridge * (x - snapshot));
      } else {
        x -= eta * mu;
      }
      for (const auto& e : data.rows[j].features) x[e.index - 1] -= eta * c * e.value;
    }
    evals += 2 * m;
    const double f = objective.value(x);
    if (!std::isfinite(f) || f > limit) {
      throw Error(Errc::step_size, "svrg diverged at epoch " + std::to_string(epoch) + "; reduce the learning rate");
    }
    out.trace.push_back({epoch, f, evals, seconds_since(t0)});
  }
  out.solution = std::move(x);
  return out;
}

BaselineResult run_gd(const ObjectiveOracle& oracle, double step, int iters, const Vec& x0) {
  require(step > 0.0, Errc::invalid_argument, "gd: step must be positive");
  require(iters >= 0, Errc::invalid_argument, "gd: iteration count must be >= 0");
  require(x0.size() == oracle.dim(), Errc::dimension_mismatch, "gd: x0 has wrong dimension");
  const SimpleConvexTerm* l = oracle.composite_part();
  const auto t0 = Clock::now();
  BaselineResult out;
  Vec x = x0;
  out.trace.push_back({0, oracle.value(x), 0, 0.0});
  for (int k = 1; k <= iters; ++k) {
    Vec y = x - step * oracle.gradient(x);
    x = l ? l->prox(y, step) : std::move(y);
    out.trace.push_back({k, oracle.value(x), k, seconds_since(t0)});
  }
  out.solution = std::move(x);
  return out;
}

}  // namespace uaf
