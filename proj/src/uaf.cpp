#include "uaf/uaf.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace uaf {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::ExactQEqualsPNu: return "exact";
    case Strategy::Heuristic: return "heuristic";
    case Strategy::Bisection: return "bisection";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "exact" || name == "ExactQEqualsPNu") return Strategy::ExactQEqualsPNu;
  if (name == "heuristic" || name == "Heuristic") return Strategy::Heuristic;
  if (name == "bisection" || name == "Bisection") return Strategy::Bisection;
  throw Error(Errc::invalid_config, "unknown strategy '" + name + "'");
}

double UafConfig::gamma_value() const { return gamma ? *gamma : std::pow(2.0, 2.0 - q); }
double UafConfig::beta_value() const { return beta ? *beta : std::pow(2.0, 2.0 - q); }
double UafConfig::c_q() const { return std::pow(beta_value() * std::pow(q - 1.0, 1.0 - q), 1.0 / q); }
double UafConfig::varsigma() const { return alpha * pnu() + (1.0 - alpha) * q; }

namespace {

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

void config_check(bool ok, const std::string& what) { require(ok, Errc::invalid_config, what); }

}  // namespace

void UafConfig::validate() const {
  config_check(p >= 1, "p must be >= 1");
  config_check(nu >= 0.0 && nu <= 1.0, "nu must lie in [0, 1]");
  config_check(pnu() >= 2.0 - 1e-12, "p + nu must be >= 2");
  config_check(L > 0.0 && std::isfinite(L), "L must be positive");
  config_check(q >= 2.0 && q <= pnu() + 1e-12, "q must lie in [2, p + nu]");
  config_check(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  config_check(theta2 > 0.0 && theta2 <= 1.0, "theta2 must lie in (0, 1]");
  config_check(theta1 > 0.0 && theta1 <= theta2, "theta1 must lie in (0, theta2]");
  config_check(gamma_value() > 0.0 && beta_value() > 0.0, "gamma and beta must be positive");
  config_check(max_iter >= 0, "max_iter must be >= 0");
  config_check(bracket_growth > 1.0, "bracket_growth must exceed 1");
  const bool q_is_pnu = same(q, pnu());
  if (strategy == Strategy::ExactQEqualsPNu) {
    config_check(q_is_pnu, "strategy exact requires q = p + nu");
  } else {
    config_check(!q_is_pnu, "strategies heuristic and bisection require q < p + nu");
    config_check(theta2 < 1.0, "theta2 must be < 1 when q < p + nu");
  }
  if (h_star_estimate) config_check(*h_star_estimate > 0.0, "h_star_estimate must be positive");
  config_check(pilot_iters >= 1, "pilot_iters must be >= 1");
}

double step_multiplier(const UafConfig& cfg, double lambda) {
  require(lambda > 0.0, Errc::invalid_argument, "step multiplier: lambda must be positive");
  return std::pow(cfg.L, cfg.alpha) /
         (cfg.c_q() * std::pow(lambda, 1.0 - cfg.alpha) * std::pow(cfg.theta2, cfg.alpha) * cfg.varsigma());
}

double proxy_value(const Vec& x, const Vec& x0, double q) { return std::pow((x - x0).norm(), q) / q; }

double a_from_lambda(double A_prev, double lambda, const UafConfig& cfg) {
  require(A_prev >= 0.0 && lambda > 0.0, Errc::invalid_argument, "coefficient solve: need A_prev >= 0, lambda > 0");
  const double q = cfg.q;
  const double kappa = lambda * cfg.c_q() * cfg.gamma_value();
  if (A_prev == 0.0) return kappa;

  // Newton in t = log a on G(t) = q t - (q-1) log(A + e^t) - log kappa, which is
  // increasing and concave with G' in [1, q].
  const double log_kappa = std::log(kappa);
  double t = std::log(std::max(kappa, std::pow(kappa * std::pow(A_prev, q - 1.0), 1.0 / q)));
  for (int it = 0; it < 200; ++it) {
    const double et = std::exp(t);
    const double g = q * t - (q - 1.0) * std::log(A_prev + et) - log_kappa;
    const double dg = q - (q - 1.0) * et / (A_prev + et);
    const double step = g / dg;
    t -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(t))) break;
  }
  const double a = std::exp(t);
  const double lhs = q * std::log(a);
  const double rhs = log_kappa + (q - 1.0) * std::log(A_prev + a);
  require(std::isfinite(a) && a > 0.0 && std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)),
          Errc::scalar_solve, "coefficient solve did not converge");
  return a;
}

CoefficientPair solve_a_exact(double A_prev, const UafConfig& cfg, double target) {
  require(same(cfg.q, cfg.pnu()), Errc::wrong_regime, "solve_a_exact requires q = p + nu");
  require(target >= cfg.theta1 - 1e-15 && target <= cfg.theta2 + 1e-15, Errc::invalid_argument,
          "solve_a_exact: target must lie in [theta1, theta2]");
  const double lambda = target / cfg.L;
  return {a_from_lambda(A_prev, lambda, cfg), lambda};
}

double heuristic_c0(const UafConfig& cfg) {
  require(cfg.theta2 < 1.0, Errc::invalid_config, "heuristic: theta2 must be < 1");
  const double q = cfg.q;
  const double pn = cfg.pnu();
  const double inner = q * std::pow(cfg.theta2, cfg.alpha) / (1.0 - std::pow(cfg.theta2, q / (q - 1.0)));
  return std::pow(inner, -(pn - q) / q) * std::pow(cfg.theta1, cfg.varsigma() / q) *
         std::pow(cfg.gamma_value(), pn / q) * cfg.c_q();
}

double heuristic_A(int i, const UafConfig& cfg, double h_star) {
  if (i <= 0) return 0.0;
  require(h_star > 0.0, Errc::invalid_argument, "heuristic: h_star must be positive");
  const double q = cfg.q;
  const double pn = cfg.pnu();
  return heuristic_c0(cfg) / cfg.L * std::pow(h_star, -(pn - q) / q) *
         std::pow(i / pn, ((q + 1.0) * pn - q) / q);
}

HeuristicCoefficients schedule_heuristic(int i, const UafConfig& cfg, double h_star) {
  require(i >= 1, Errc::invalid_argument, "heuristic: i must be >= 1");
  require(cfg.q < cfg.pnu() && !same(cfg.q, cfg.pnu()), Errc::wrong_regime, "heuristic requires q < p + nu");
  HeuristicCoefficients out;
  out.A = heuristic_A(i, cfg, h_star);
  out.a = out.A - heuristic_A(i - 1, cfg, h_star);
  out.lambda = std::pow(out.a, cfg.q) / (cfg.c_q() * cfg.gamma_value() * std::pow(out.A, cfg.q - 1.0));
  return out;
}

HeuristicCoefficients schedule_heuristic(int i, const UafConfig& cfg) {
  require(cfg.h_star_estimate.has_value(), Errc::invalid_config, "heuristic: h_star_estimate not set");
  return schedule_heuristic(i, cfg, *cfg.h_star_estimate);
}

namespace {

struct Probe {
  double a = 0.0;
  double A = 0.0;
  double chi = 0.0;
  Vec x_hat;
  StepResult step;
};

Probe tensor_step(const ObjectiveOracle& oracle, const UafConfig& cfg, const IterateState& state, double a,
                  double lambda) {
  Probe pr;
  pr.a = a;
  pr.A = state.A + a;
  pr.x_hat = (state.A / pr.A) * state.x + (a / pr.A) * state.z;
  const TaylorModel model = build_taylor(oracle, pr.x_hat, cfg.p);
  const StepSpec spec{&model, step_multiplier(cfg, lambda), cfg.varsigma()};
  pr.step = solve_step(spec, cfg.subsolver);
  pr.chi = cfg.L * lambda * std::pow(pr.step.displacement_norm, cfg.pnu() - cfg.q);
  return pr;
}

BisectionResult accept(Probe pr, double lambda, int probes) {
  BisectionResult out;
  out.a = pr.a;
  out.lambda = lambda;
  out.A = pr.A;
  out.chi = pr.chi;
  out.x_hat = std::move(pr.x_hat);
  out.step = std::move(pr.step);
  out.probes = probes;
  return out;
}

}  // namespace

BisectionResult find_lambda_bisection(const ObjectiveOracle& oracle, const UafConfig& cfg, const IterateState& state,
                                      double seed_lambda, double bracket_growth) {
  require(cfg.q < cfg.pnu() && !same(cfg.q, cfg.pnu()), Errc::wrong_regime, "bisection requires q < p + nu");
  require(seed_lambda > 0.0 && bracket_growth > 1.0, Errc::invalid_argument, "bisection: bad seed or growth");
  const double t1 = cfg.theta1;
  const double t2 = cfg.theta2;
  int probes = 0;
  auto probe = [&](double lambda) {
    ++probes;
    return tensor_step(oracle, cfg, state, a_from_lambda(state.A, lambda, cfg), lambda);
  };
  auto in_range = [&](const Probe& pr) { return pr.chi >= t1 && pr.chi <= t2; };

  double lambda = seed_lambda;
  Probe pr = probe(lambda);
  if (in_range(pr)) return accept(std::move(pr), lambda, probes);

  double lo = 0.0;
  double hi = 0.0;
  if (pr.chi < t1) {
    lo = lambda;
    for (int n = 0;; ++n) {
      if (n >= 60) {
        throw BracketingError("no lambda with chi >= theta1 within 60 expansions", pr.step.displacement_norm);
      }
      lambda *= bracket_growth;
      pr = probe(lambda);
      if (in_range(pr)) return accept(std::move(pr), lambda, probes);
      if (pr.chi > t2) break;
      lo = lambda;
    }
    hi = lambda;
  } else {
    hi = lambda;
    for (int n = 0;; ++n) {
      if (n >= 60) {
        throw BracketingError("no lambda with chi <= theta2 within 60 contractions", pr.step.displacement_norm);
      }
      lambda /= bracket_growth;
      pr = probe(lambda);
      if (in_range(pr)) return accept(std::move(pr), lambda, probes);
      if (pr.chi < t1) break;
      hi = lambda;
    }
    lo = lambda;
  }

  for (int n = 0; n < 200; ++n) {
    lambda = std::sqrt(lo * hi);
    pr = probe(lambda);
    if (in_range(pr)) return accept(std::move(pr), lambda, probes);
    if (pr.chi < t1) lo = lambda; else hi = lambda;
    if (hi / lo - 1.0 <= 4.0 * std::numeric_limits<double>::epsilon()) break;
  }
  throw BracketingError("bisection interval collapsed without reaching [theta1, theta2]", pr.step.displacement_norm);
}

Vec z_update(const Vec& s, const Vec& x0, double A, double q, const SimpleConvexTerm* composite) {
  require(s.size() == x0.size(), Errc::dimension_mismatch, "z update: aggregate and anchor sizes differ");
  if (composite) {
    require(q == 2.0, Errc::capability, "z update: composite term needs q = 2");
    return composite->prox(x0 - s, A);
  }
  if (q == 2.0) return x0 - s;
  const double sn = s.norm();
  if (sn == 0.0) return x0;
  return x0 - s * std::pow(sn, (2.0 - q) / (q - 1.0));
}

RunResult run(const ObjectiveOracle& oracle, const UafConfig& cfg, const Vec& x0) {
  cfg.validate();
  require(x0.size() == oracle.dim(), Errc::dimension_mismatch, "run: x0 has wrong dimension");
  require(oracle.smooth_order() >= cfg.p, Errc::unsupported_order, "run: oracle cannot serve order p");
  const SimpleConvexTerm* l = oracle.composite_part();
  if (l) require(cfg.q == 2.0, Errc::capability, "run: composite problems need q = 2");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  RunResult out;
  std::optional<double> h_star = cfg.h_star_estimate;
  if (cfg.strategy == Strategy::Heuristic && !h_star) {
    UafConfig pilot = cfg;
    pilot.q = cfg.pnu();
    pilot.gamma.reset();
    pilot.beta.reset();
    pilot.strategy = Strategy::ExactQEqualsPNu;
    pilot.max_iter = cfg.pilot_iters;
    pilot.stop_gap.reset();
    const RunResult pr = run(oracle, pilot, x0);
    h_star = std::max(proxy_value(pr.best_x, x0, cfg.q), std::numeric_limits<double>::min());
  }
  out.h_star_used = h_star;

  IterateState st;
  st.x = x0;
  st.z = x0;
  st.grad_aggregate = Vec::Zero(x0.size());
  st.x_hat = x0;
  out.solution = x0;
  out.best_x = x0;
  out.best_f = oracle.value(x0);
  out.final_state = st;

  double prev_lambda = 0.0;
  for (int i = 1; i <= cfg.max_iter; ++i) {
    Probe pr;
    double lambda = 0.0;
    int probes = 1;
    bool fallback = false;
    double omega = 0.0;

    auto bisect = [&](double seed) {
      BisectionResult br = find_lambda_bisection(oracle, cfg, st, seed, cfg.bracket_growth);
      pr.a = br.a;
      pr.A = br.A;
      pr.chi = br.chi;
      pr.x_hat = std::move(br.x_hat);
      pr.step = std::move(br.step);
      lambda = br.lambda;
      probes = br.probes;
    };

    try {
      switch (cfg.strategy) {
        case Strategy::ExactQEqualsPNu: {
          const CoefficientPair c = solve_a_exact(st.A, cfg, cfg.theta2);
          lambda = c.lambda;
          pr = tensor_step(oracle, cfg, st, c.a, lambda);
          break;
        }
        case Strategy::Heuristic: {
          const double a = heuristic_A(i, cfg, *h_star) - heuristic_A(i - 1, cfg, *h_star);
          const double A = st.A + a;
          lambda = std::pow(a, cfg.q) / (cfg.c_q() * cfg.gamma_value() * std::pow(A, cfg.q - 1.0));
          pr = tensor_step(oracle, cfg, st, a, lambda);
          if (pr.chi > cfg.theta2) {
            ++out.indicator_violations;
            if (cfg.violation_policy == ViolationPolicy::fallback) {
              bisect(lambda);
              ++probes;
              fallback = true;
            }
          }
          break;
        }
        case Strategy::Bisection: {
          double seed = prev_lambda;
          if (i == 1) {
            const double R = std::max(1.0, oracle.gradient(x0).norm());
            seed = cfg.theta2 / (cfg.L * std::pow(R, cfg.pnu() - cfg.q));
          }
          bisect(seed);
          break;
        }
      }
    } catch (const BracketingError& e) {
      if (e.last_displacement() == 0.0) {
        out.converged = true;
        break;
      }
      throw;
    }
    omega = pr.chi;
    prev_lambda = lambda;

    const Vec& x_new = pr.step.x_new;
    st.i = i;
    st.a = pr.a;
    st.A = pr.A;
    st.lambda = lambda;
    st.omega = omega;
    st.x_hat = pr.x_hat;
    st.x = x_new;
    st.grad_aggregate += pr.a * oracle.gradient(x_new);
    st.z = z_update(st.grad_aggregate, x0, st.A, cfg.q, l);

    const double f = oracle.value(x_new);
    require(std::isfinite(f), Errc::evaluation_failure, "run: non-finite objective at iteration " + std::to_string(i));
    if (f < out.best_f) {
      out.best_f = f;
      out.best_x = x_new;
    }
    IterationRecord rec;
    rec.i = i;
    rec.f = f;
    rec.omega = omega;
    rec.lambda = lambda;
    rec.A = st.A;
    rec.a = st.a;
    rec.disp = pr.step.displacement_norm;
    rec.wall_s = elapsed();
    rec.probes = probes;
    rec.fallback = fallback;
    out.trace.push_back(rec);

    if (pr.step.displacement_norm == 0.0) {
      out.converged = true;
      break;
    }
    if (cfg.stop_gap && cfg.f_ref && f - *cfg.f_ref <= *cfg.stop_gap) {
      out.converged = true;
      break;
    }
  }
  out.solution = st.x;
  out.final_state = st;
  if (out.indicator_violations > 0) {
    out.warnings.push_back("indicator exceeded theta2 on " + std::to_string(out.indicator_violations) +
                           " iteration(s)");
  }
  return out;
}

}  // namespace uaf
