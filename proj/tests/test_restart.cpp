#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "uaf/restart.hpp"

using namespace uaf;

TEST_CASE("epoch lengths") {
  RestartConfig c;
  c.s = 2.0;
  c.v = 3.0;
  c.r = 3.5;
  c.c_A = 1.0;
  c.R = 1.0;
  c.sigma = 1.0;
  c.K = 6;
  CHECK(std::ceil(std::pow(8.0, 2.0 / 7.0)) == 2.0);
  CHECK(restart_m0(c) == 2);
  REQUIRE(restart_k0(c).has_value());
  CHECK(*restart_k0(c) == 2);
  CHECK(epoch_schedule(c) == std::vector<int>{2, 2, 1, 1, 1, 1});

  RestartConfig flat = c;
  flat.v = 2.0;
  CHECK(!restart_k0(flat).has_value());
  for (int m : epoch_schedule(flat)) CHECK(m == restart_m0(flat));

  RestartConfig grow = c;
  grow.s = 3.0;
  grow.v = 2.0;
  CHECK(!restart_k0(grow).has_value());
  const auto sched = epoch_schedule(grow);
  for (std::size_t k = 1; k < sched.size(); ++k) CHECK(sched[k] >= sched[k - 1]);

  CHECK(superlinear_scale(c) == doctest::Approx(std::pow(1.0 / 8.0, 1.0)));
  CHECK_THROWS_AS(superlinear_scale(flat), Error);
}

TEST_CASE("rate constants of the inner method") {
  UafConfig u;
  u.p = 1;
  u.nu = 1.0;
  u.q = 2.0;
  u.L = 1.0;
  u.theta1 = 1.0;
  u.theta2 = 1.0;
  const RateConstants rc = uaf_rate_constants(u);
  CHECK(rc.c_A == doctest::Approx(4.0));
  CHECK(rc.r == 2.0);
  CHECK(rc.v == 2.0);

  UafConfig cubic;
  cubic.q = 3.0;
  CHECK(uaf_rate_constants(cubic).r == doctest::Approx(3.0));

  UafConfig h;
  h.q = 2.0;
  h.theta1 = 0.5;
  h.theta2 = 0.67;
  h.strategy = Strategy::Heuristic;
  const RateConstants rh = uaf_rate_constants(h);
  CHECK(rh.r == doctest::Approx(3.5));
  CHECK(rh.v == 3.0);
}

TEST_CASE("restarted engine on a strongly convex quadratic") {
  const auto f = make_diagonal_quadratic(Vec::Ones(3), Vec::Zero(3));
  UafConfig u;
  u.p = 1;
  u.nu = 1.0;
  u.q = 2.0;
  u.L = 1.0;
  const RateConstants rc = uaf_rate_constants(u);
  RestartConfig c;
  c.v = rc.v;
  c.r = rc.r;
  c.c_A = rc.c_A;
  const Vec x0 = test::vec({1.0, -0.5, 0.25});
  c.R = x0.norm();
  c.K = 6;
  auto value = [&](const Vec& x) { return f->value(x); };
  const RestartResult res = run_restarted(uaf_inner_solver(*f, u), c, x0, value);
  REQUIRE(res.epochs.size() == 7);
  for (const auto& e : res.epochs) {
    if (e.k >= 1) CHECK(e.f <= 1.0 / (2.0 * std::pow(4.0, e.k)) * x0.squaredNorm() + 1e-12);
  }

  const RestartResult fixed = run_restarted(uaf_inner_solver(*f, u), c, Vec::Zero(3), value);
  for (const auto& e : fixed.epochs) CHECK(e.f == 0.0);
  CHECK(fixed.solution == Vec::Zero(3));

  RestartConfig none = c;
  none.K = 0;
  const RestartResult empty = run_restarted(uaf_inner_solver(*f, u), none, x0, value);
  CHECK(empty.solution == x0);
  CHECK(empty.total_inner == 0);
}

TEST_CASE("inner failures carry the epoch") {
  RestartConfig c;
  c.K = 3;
  int calls = 0;
  InnerSolver failing = [&](const Vec& y, int) -> Vec {
    if (++calls == 2) throw Error(Errc::evaluation_failure, "boom");
    return y;
  };
  try {
    run_restarted(failing, c, Vec::Zero(1), [](const Vec&) { return 0.0; });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::evaluation_failure);
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}
