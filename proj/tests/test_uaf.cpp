#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "uaf/uaf.hpp"

using namespace uaf;

namespace {

UafConfig q3_half() {
  UafConfig c;
  c.p = 2;
  c.nu = 1.0;
  c.q = 3.0;
  c.gamma = 0.5;
  c.beta = 0.5;
  c.L = 1.0;
  c.theta1 = 1.0;
  c.theta2 = 1.0;
  return c;
}

UafConfig heuristic_defaults() {
  UafConfig c;
  c.p = 2;
  c.nu = 1.0;
  c.q = 2.0;
  c.alpha = 1.0;
  c.theta1 = 0.5;
  c.theta2 = 0.67;
  c.gamma = 1.0;
  c.beta = 1.0;
  c.L = 1.0;
  c.strategy = Strategy::Heuristic;
  return c;
}

bool invalid(const UafConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    return e.code() == Errc::invalid_config;
  }
  return false;
}

}  // namespace

TEST_CASE("derived constants") {
  const UafConfig c = q3_half();
  CHECK(c.c_q() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.varsigma() == 3.0);
  UafConfig d;
  d.q = 2.5;
  CHECK(d.gamma_value() == doctest::Approx(std::pow(2.0, -0.5)));
  d.alpha = 0.25;
  CHECK(d.varsigma() == doctest::Approx(0.25 * 3.0 + 0.75 * 2.5));
}

TEST_CASE("config validation") {
  UafConfig c = q3_half();
  c.validate();
  UafConfig t = c;
  t.theta1 = 0.9;
  t.theta2 = 0.8;
  CHECK(invalid(t));
  UafConfig big = c;
  big.q = 3.5;
  CHECK(invalid(big));
  UafConfig exact_lower = c;
  exact_lower.q = 2.5;
  CHECK(invalid(exact_lower));
  UafConfig heur = heuristic_defaults();
  heur.validate();
  heur.q = 3.0;
  CHECK(invalid(heur));
  UafConfig bad_L = c;
  bad_L.L = 0.0;
  CHECK(invalid(bad_L));
}

TEST_CASE("exact coefficient solve") {
  const UafConfig c = q3_half();
  const CoefficientPair first = solve_a_exact(0.0, c, 1.0);
  CHECK(first.a == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(first.lambda == 1.0);

  const double oracle = test::bisect([](double a) { return a * a * a - 0.25 * (0.25 + a) * (0.25 + a); }, 0.0, 5.0);
  CHECK(oracle == doctest::Approx(0.5369747589261968).epsilon(1e-13));
  CHECK(solve_a_exact(0.25, c, 1.0).a == doctest::Approx(0.5369747589261968).epsilon(1e-13));

  UafConfig two;
  two.p = 1;
  two.nu = 1.0;
  two.q = 2.0;
  two.gamma = 1.0;
  two.beta = 1.0;
  CHECK(solve_a_exact(0.0, two, 1.0).a == doctest::Approx(1.0));
}

TEST_CASE("coefficient identity holds across scales") {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> logu(-8.0, 8.0);
  for (double q : {2.0, 2.5, 3.0, 3.7}) {
    UafConfig c;
    c.p = 3;
    c.nu = 1.0;
    c.q = q;
    for (int t = 0; t < 50; ++t) {
      const double A = std::pow(10.0, logu(rng));
      const double lambda = std::pow(10.0, logu(rng));
      const double a = a_from_lambda(A, lambda, c);
      const double back = std::pow(a, q) / (c.c_q() * c.gamma_value() * std::pow(A + a, q - 1.0));
      CHECK(back == doctest::Approx(lambda).epsilon(1e-10));
    }
  }
}

TEST_CASE("heuristic schedule") {
  const UafConfig c = heuristic_defaults();
  // constant expression evaluated directly
  const double c0 = std::pow(2.0 * 0.67 / (1.0 - 0.67 * 0.67), -0.5) * std::pow(0.5, 1.5);
  CHECK(c0 == doctest::Approx(0.2267).epsilon(1e-3));
  CHECK(heuristic_c0(c) == doctest::Approx(c0).epsilon(1e-14));
  CHECK(heuristic_A(3, c, 1.0) == doctest::Approx(c0).epsilon(1e-14));
  CHECK(heuristic_A(1, c, 1.0) == doctest::Approx(c0 * std::pow(1.0 / 3.0, 3.5)).epsilon(1e-14));
  CHECK(heuristic_A(1, c, 1.0) == doctest::Approx(0.00487).epsilon(1e-3));
  CHECK(heuristic_A(0, c, 1.0) == 0.0);

  UafConfig near = c;
  near.q = 3.0 - 1e-12;
  CHECK(heuristic_A(4, near, 1.0) == doctest::Approx(heuristic_A(4, near, 1e6)).epsilon(1e-9));

  const HeuristicCoefficients h = schedule_heuristic(5, c, 2.0);
  CHECK(h.A == doctest::Approx(heuristic_A(5, c, 2.0)));
  CHECK(h.a == doctest::Approx(heuristic_A(5, c, 2.0) - heuristic_A(4, c, 2.0)));
  CHECK(h.lambda == doctest::Approx(h.a * h.a / h.A));
  CHECK_THROWS_AS(schedule_heuristic(1, c), Error);
}

TEST_CASE("z update") {
  const Vec s = test::vec({3.0, 4.0});
  const Vec z2 = z_update(s, Vec::Zero(2), 1.0, 2.0, nullptr);
  CHECK(z2 == test::vec({-3.0, -4.0}));
  const Vec z3 = z_update(s, Vec::Zero(2), 1.0, 3.0, nullptr);
  CHECK(z3[0] == doctest::Approx(-3.0 / std::sqrt(5.0)));
  CHECK(z3[1] == doctest::Approx(-4.0 / std::sqrt(5.0)));
  // grad of (1/3)||z||^3 is ||z|| z and must equal -s
  const Vec grad_h = z3.norm() * z3;
  CHECK((grad_h + s).norm() <= 1e-14);
  const Vec x0 = test::vec({1.0, -2.0});
  CHECK(z_update(Vec::Zero(2), x0, 1.0, 2.5, nullptr) == x0);
  L1Norm l1(1.0);
  CHECK_THROWS_AS(z_update(s, Vec::Zero(2), 1.0, 3.0, &l1), Error);
}

TEST_CASE("proxy") {
  const Vec x0 = test::vec({1.0, 1.0});
  CHECK(proxy_value(x0, x0, 3.0) == 0.0);
  CHECK(proxy_value(test::vec({1.0, 3.0}), x0, 3.0) == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("bisection") {
  const auto g = make_diagonal_quadratic(Vec::Ones(2), Vec::Zero(2));
  UafConfig c = heuristic_defaults();
  c.strategy = Strategy::Bisection;

  IterateState stationary;
  stationary.x = Vec::Zero(2);
  stationary.z = Vec::Zero(2);
  try {
    find_lambda_bisection(*g, c, stationary, 1.0);
    FAIL("expected bracketing error");
  } catch (const BracketingError& e) {
    CHECK(e.last_displacement() == 0.0);
  }
  const RunResult at_opt = uaf::run(*g, c, Vec::Zero(2));
  CHECK(at_opt.converged);
  CHECK(at_opt.trace.empty());

  const auto q = make_diagonal_quadratic(test::vec({1.0, 5.0}), test::vec({1.0, -1.0}));
  IterateState st;
  st.x = test::vec({2.0, 2.0});
  st.z = test::vec({2.0, 2.0});
  const BisectionResult r = find_lambda_bisection(*q, c, st, 1e-6);
  const double omega = c.L * r.lambda * std::pow((r.step.x_new - r.x_hat).norm(), c.pnu() - c.q);
  CHECK(omega >= 0.5);
  CHECK(omega <= 0.67);
  CHECK(omega == doctest::Approx(r.chi));

  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    Mat a = test::random_symmetric(rng, 4);
    const Mat h = a * a.transpose() + 0.1 * Mat::Identity(4, 4);
    const auto rq = make_quadratic(h, test::random_vec(rng, 4));
    IterateState s;
    s.x = test::random_vec(rng, 4);
    s.z = s.x;
    const BisectionResult b = find_lambda_bisection(*rq, c, s, 1e-12);
    CHECK(b.chi >= c.theta1);
    CHECK(b.chi <= c.theta2);
  }
}

TEST_CASE("certificate for the first-order instance") {
  const auto g = make_diagonal_quadratic(Vec::Ones(2), Vec::Zero(2));
  for (double alpha : {0.0, 0.5, 1.0}) {
    UafConfig c;
    c.p = 1;
    c.nu = 1.0;
    c.q = 2.0;
    c.alpha = alpha;
    c.L = 1.0;
    c.max_iter = 50;
    const RunResult run = uaf::run(*g, c, test::vec({1.0, 0.0}));
    REQUIRE(!run.trace.empty());
    for (const auto& r : run.trace) CHECK(r.f <= 0.5 / r.A + 1e-15);
  }
}

TEST_CASE("stationary start stops at the first iteration") {
  const auto g = make_diagonal_quadratic(Vec::Ones(2), test::vec({1.0, 2.0}));
  const Vec x0 = test::vec({1.0, 2.0});
  UafConfig c = q3_half();
  c.gamma.reset();
  c.beta.reset();
  const RunResult run = uaf::run(*g, c, x0);
  REQUIRE(run.trace.size() == 1);
  CHECK(run.trace[0].disp == 0.0);
  CHECK(run.solution == x0);
}

TEST_CASE("growth of A under the exact strategy") {
  auto data = std::make_shared<SparseDataset>(make_synthetic_logistic(40, 2, 7));
  const LogisticObjective f(data);
  UafConfig c;
  c.p = 2;
  c.nu = 1.0;
  c.q = 3.0;
  c.L = logistic_smoothness_constant(*data, 2.0, 1.0);
  c.max_iter = 60;
  const RunResult run = uaf::run(f, c, Vec::Zero(2));
  for (const auto& r : run.trace) {
    CHECK(r.A >= c.theta1 * c.c_q() * c.gamma_value() / c.L * std::pow(r.i / 3.0, 3.0) * (1 - 1e-10));
    CHECK(c.L * r.lambda >= c.theta1);
    CHECK(c.L * r.lambda <= c.theta2);
    const double lam = std::pow(r.a, c.q) / (c.c_q() * c.gamma_value() * std::pow(r.A, c.q - 1.0));
    CHECK(lam == doctest::Approx(r.lambda).epsilon(1e-10));
  }
}

TEST_CASE("heuristic strategy with fallback keeps the indicator in range") {
  auto data = std::make_shared<SparseDataset>(make_synthetic_logistic(100, 5, 8));
  const LogisticObjective f(data);
  UafConfig c = heuristic_defaults();
  c.gamma.reset();
  c.beta.reset();
  c.L = 1e-3;
  c.h_star_estimate = 1e-6;  // far too small: early coefficients overshoot
  c.violation_policy = ViolationPolicy::fallback;
  c.max_iter = 40;
  const RunResult run = uaf::run(f, c, Vec::Zero(5));
  int fallbacks = 0;
  for (const auto& r : run.trace) {
    if (r.fallback) {
      ++fallbacks;
      CHECK(r.omega <= c.theta2);
    }
  }
  CHECK(fallbacks > 0);
  CHECK(fallbacks == run.indicator_violations);
  c.violation_policy = ViolationPolicy::warn;
  const RunResult warned = uaf::run(f, c, Vec::Zero(5));
  CHECK(warned.indicator_violations >= 0);
  if (warned.indicator_violations > 0) CHECK(!warned.warnings.empty());
}
