#include "uaf/restart.hpp"

#include <cmath>
#include <limits>

namespace uaf {

namespace {

// Ceiling that ignores rounding noise just above an integer.
int safe_ceil(double x) {
  require(std::isfinite(x) && x < 1e9, Errc::invalid_argument, "restart: epoch length overflows");
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x))) return std::max(1, static_cast<int>(r));
  return std::max(1, static_cast<int>(std::ceil(x)));
}

}  // namespace

void RestartConfig::validate() const {
  require(s >= 2.0, Errc::invalid_config, "restart: s must be >= 2");
  require(sigma > 0.0 && v > 0.0 && r > 0.0 && c_A > 0.0 && R > 0.0, Errc::invalid_config,
          "restart: sigma, v, r, c_A and R must be positive");
  require(K >= 0, Errc::invalid_config, "restart: K must be >= 0");
}

int restart_m0(const RestartConfig& cfg) {
  cfg.validate();
  const double base = std::pow(2.0, cfg.s) * cfg.s * cfg.c_A * std::pow(cfg.R, cfg.v - cfg.s) / cfg.sigma;
  return safe_ceil(std::pow(base, 1.0 / cfg.r));
}

std::optional<int> restart_k0(const RestartConfig& cfg) {
  cfg.validate();
  if (cfg.s >= cfg.v) return std::nullopt;
  const double k = 1.0 / cfg.s + cfg.v / cfg.s * std::log2(cfg.R) +
                   std::log2(cfg.s * cfg.c_A / cfg.sigma) / (cfg.v - cfg.s);
  const double r = std::round(k);
  const double c = std::abs(k - r) <= 1e-12 * std::max(1.0, std::abs(k)) ? r : std::ceil(k);
  return static_cast<int>(std::max(0.0, std::min(c, 1e9)));
}

std::vector<int> epoch_schedule(const RestartConfig& cfg) {
  const int m0 = restart_m0(cfg);
  const std::optional<int> k0 = restart_k0(cfg);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    if (k0 && k >= *k0) {
      out.push_back(1);
    } else {
      out.push_back(safe_ceil(m0 * std::pow(2.0, -(cfg.v - cfg.s) * k / cfg.r)));
    }
  }
  return out;
}

double superlinear_scale(const RestartConfig& cfg) {
  require(cfg.s < cfg.v, Errc::wrong_regime, "restart: superlinear phase needs s < v");
  return std::pow(std::pow(cfg.sigma, cfg.v) / (std::pow(cfg.s, cfg.v) * std::pow(cfg.c_A, cfg.s)),
                  1.0 / (cfg.v - cfg.s));
}

RestartResult run_restarted(const InnerSolver& inner, const RestartConfig& cfg, const Vec& x0,
                            const std::function<double(const Vec&)>& objective) {
  const std::vector<int> schedule = epoch_schedule(cfg);
  RestartResult out;
  Vec y = x0;
  out.epochs.push_back({0, 0, objective(y)});
  for (int k = 0; k < cfg.K; ++k) {
    const int m = schedule[static_cast<std::size_t>(k)];
    try {
      y = inner(y, m);
    } catch (const InnerSolverError& e) {
      throw InnerSolverError("epoch " + std::to_string(k) + ": " + e.what(), e.best_iterate());
    } catch (const Error& e) {
      throw Error(e.code(), "epoch " + std::to_string(k) + ": " + e.what());
    }
    out.total_inner += m;
    out.epochs.push_back({k + 1, m, objective(y)});
  }
  out.solution = std::move(y);
  return out;
}

RateConstants uaf_rate_constants(const UafConfig& cfg) {
  cfg.validate();
  const double pn = cfg.pnu();
  const double q = cfg.q;
  RateConstants out;
  out.v = pn;
  out.r = ((q + 1.0) * pn - q) / q;
  if (std::abs(q - pn) <= 1e-12 * pn) {
    out.c_A = std::pow(pn, pn) * cfg.L / (cfg.theta1 * cfg.c_q() * cfg.gamma_value());
  } else {
    out.c_A = std::pow(heuristic_c0(cfg), -(pn - q) / q) * std::pow(pn, out.r) * cfg.L;
  }
  return out;
}

InnerSolver uaf_inner_solver(const ObjectiveOracle& oracle, UafConfig cfg) {
  return [&oracle, cfg](const Vec& y, int m) mutable {
    cfg.max_iter = m;
    return run(oracle, cfg, y).solution;
  };
}

}  // namespace uaf
