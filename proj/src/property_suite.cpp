#include "uaf/property_suite.hpp"

#include <cmath>
#include <functional>

#include "uaf/common.hpp"

namespace uaf {

namespace {

constexpr double kRelTol = 1e-12;

bool geq(double lhs, double rhs) { return lhs >= rhs - kRelTol * std::max(std::abs(lhs), std::abs(rhs)); }

bool valid_sequence(const std::vector<double>& b) {
  if (b.size() < 2 || b.front() != 0.0) return false;
  for (std::size_t k = 1; k < b.size(); ++k) {
    if (!(b[k] > 0.0) || !std::isfinite(b[k])) return false;
  }
  return true;
}

// (x - b)^rho / x^{rho-1} is increasing on x > b; returns the x where it equals target.
double smallest_step(double b, double rho, double target) {
  auto ratio = [&](double x) { return std::pow(x - b, rho) / std::pow(x, rho - 1.0); };
  double lo = b;
  double hi = b + std::max(target, 1e-300);
  while (ratio(hi) < target) {
    lo = hi;
    hi = b + 2.0 * (hi - b);
  }
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(mid) >= target) hi = mid; else lo = mid;
  }
  return hi;
}

double slack(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  if (r < 0.2) return 1.0;
  return 1.0 + 0.5 * u(rng);
}

}  // namespace

const char* to_string(CheckOutcome outcome) {
  switch (outcome) {
    case CheckOutcome::holds: return "holds";
    case CheckOutcome::violated: return "violated";
    case CheckOutcome::inapplicable: return "inapplicable";
  }
  return "unknown";
}

CheckOutcome check_seq_lemma_1(const SequenceCase& c) {
  if (!valid_sequence(c.b) || c.rho < 1.0 || !(c.C > 0.0)) return CheckOutcome::inapplicable;
  for (std::size_t k = 1; k < c.b.size(); ++k) {
    const double step = c.b[k] - c.b[k - 1];
    if (step <= 0.0 || !geq(std::pow(step, c.rho), c.C * std::pow(c.b[k], c.rho - 1.0))) {
      return CheckOutcome::inapplicable;
    }
  }
  for (std::size_t k = 1; k < c.b.size(); ++k) {
    if (!geq(c.b[k], c.C * std::pow(static_cast<double>(k) / c.rho, c.rho))) return CheckOutcome::violated;
  }
  return CheckOutcome::holds;
}

CheckOutcome check_seq_lemma_2(const SequenceCase& c) {
  if (!valid_sequence(c.b) || c.rho < 1.0 || !(c.C > 0.0) || !(c.delta > 0.0)) return CheckOutcome::inapplicable;
  double sum = 0.0;
  for (std::size_t k = 1; k < c.b.size(); ++k) {
    const double step = c.b[k] - c.b[k - 1];
    if (step <= 0.0) return CheckOutcome::inapplicable;
    sum += std::pow(std::pow(c.b[k], c.rho - 1.0) / std::pow(step, c.rho), c.delta);
    if (!geq(c.C, sum)) return CheckOutcome::inapplicable;
  }
  for (std::size_t k = 1; k < c.b.size(); ++k) {
    const double bound =
        std::pow(c.C, -1.0 / c.delta) * std::pow(static_cast<double>(k) / c.rho, c.rho + 1.0 / c.delta);
    if (!geq(c.b[k], bound)) return CheckOutcome::violated;
  }
  return CheckOutcome::holds;
}

bool check_young_type(double s, double t, double q, double sigma) {
  require(s >= 0.0 && t >= 0.0 && q >= 2.0 && sigma > 0.0, Errc::invalid_argument,
          "young-type check: need s, t >= 0, q >= 2, sigma > 0");
  const double lhs = s * t;
  const double rhs = sigma / q * std::pow(t, q) +
                     (q - 1.0) / q * std::pow(1.0 / sigma, 1.0 / (q - 1.0)) * std::pow(s, q / (q - 1.0));
  return lhs <= rhs * (1.0 + kRelTol) + 1e-300;
}

CheckOutcome check_bjl(const std::vector<double>& B, double c, double upsilon) {
  if (B.empty() || !(c > 0.0) || !(upsilon > 1.0)) return CheckOutcome::inapplicable;
  double sum = 0.0;
  for (double v : B) {
    if (!(v > 0.0) || !std::isfinite(v)) return CheckOutcome::inapplicable;
    sum += v;
    if (!geq(std::pow(v, upsilon), c * sum)) return CheckOutcome::inapplicable;
  }
  for (std::size_t k = 1; k <= B.size(); ++k) {
    const double bound = std::pow((upsilon - 1.0) / upsilon * c * static_cast<double>(k), 1.0 / (upsilon - 1.0));
    if (!geq(B[k - 1], bound)) return CheckOutcome::violated;
  }
  return CheckOutcome::holds;
}

SequenceCase make_lemma_1_case(std::mt19937_64& rng, int length) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SequenceCase c;
  c.rho = 1.0 + 2.0 * u(rng);
  c.C = std::exp(std::log(1e-2) + u(rng) * std::log(1e4));
  c.b.push_back(0.0);
  for (int k = 1; k <= length; ++k) {
    const double prev = c.b.back();
    // Smallest x with (x - prev)^rho >= C x^{rho-1}.
    c.b.push_back(smallest_step(prev, c.rho, c.C) * slack(rng));
  }
  return c;
}

SequenceCase make_lemma_2_case(std::mt19937_64& rng, int length) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SequenceCase c;
  c.rho = 1.0 + 2.0 * u(rng);
  c.delta = 0.25 + 1.75 * u(rng);
  c.C = std::exp(std::log(1e-2) + u(rng) * std::log(1e4));
  // Split the budget C over the terms, either evenly or front-loaded.
  std::vector<double> share(static_cast<std::size_t>(length));
  double total = 0.0;
  const bool even = u(rng) < 0.5;
  for (int k = 1; k <= length; ++k) {
    share[static_cast<std::size_t>(k - 1)] = even ? 1.0 : 1.0 / (static_cast<double>(k) * k);
    total += share[static_cast<std::size_t>(k - 1)];
  }
  c.b.push_back(0.0);
  for (int k = 1; k <= length; ++k) {
    const double budget = c.C * share[static_cast<std::size_t>(k - 1)] / total;
    // term_k <= budget  <=>  (x - prev)^rho / x^{rho-1} >= budget^{-1/delta}.
    c.b.push_back(smallest_step(c.b.back(), c.rho, std::pow(budget, -1.0 / c.delta)) * slack(rng));
  }
  return c;
}

BjlCase make_bjl_case(std::mt19937_64& rng, int length) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BjlCase c;
  c.upsilon = 1.1 + 2.9 * u(rng);
  c.c = std::exp(std::log(1e-2) + u(rng) * std::log(1e4));
  double sum = 0.0;
  for (int k = 1; k <= length; ++k) {
    // Positive root of B^upsilon - c B - c sum = 0.
    auto f = [&](double x) { return std::pow(x, c.upsilon) - c.c * x - c.c * sum; };
    double lo = 0.0;
    double hi = std::max(1.0, std::pow(c.c, 1.0 / (c.upsilon - 1.0)));
    while (f(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) >= 0.0) hi = mid; else lo = mid;
    }
    const double v = hi * slack(rng);
    c.B.push_back(v);
    sum += v;
  }
  return c;
}

}  // namespace uaf
