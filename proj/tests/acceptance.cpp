// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uaf/continuum.hpp"
#include "uaf/experiment.hpp"
#include "uaf/property_suite.hpp"
#include "uaf/restart.hpp"

using namespace uaf;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> body;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

ProblemInstance logistic_problem() {
  ExperimentConfig c;
  c.problem = "logistic";
  c.n = 500;
  c.d = 20;
  c.seed = 1;
  return build_problem(c);
}

ProblemInstance quadratic_problem() {
  ExperimentConfig c;
  c.problem = "quadratic";
  c.d = 20;
  c.cond = 10.0;
  c.seed = 1;
  return build_problem(c);
}

const std::vector<double>& l_grid() {
  static const std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  return grid;
}

UafConfig exact_cfg(double L) {
  UafConfig u;
  u.p = 2;
  u.nu = 1.0;
  u.q = 3.0;
  u.L = L;
  u.theta1 = 1.0;
  u.theta2 = 1.0;
  u.strategy = Strategy::ExactQEqualsPNu;
  u.max_iter = 200;
  return u;
}

struct CertificateCheck {
  int violations = 0;
  int growth_violations = 0;
  double worst_ratio = 0.0;
  int iterations = 0;
};

CertificateCheck certify(const ProblemInstance& inst, const UafConfig& u) {
  const ReferenceSolution ref = reference_solution(*inst.oracle, inst.x0, 200);
  const RunResult run = uaf::run(*inst.oracle, u, inst.x0);
  const double h = proxy_value(ref.x, inst.x0, u.q);
  CertificateCheck out;
  out.iterations = static_cast<int>(run.trace.size());
  const double growth = u.theta1 * u.c_q() * u.gamma_value() / u.L;
  for (const auto& r : run.trace) {
    if (r.f - ref.f > h / r.A + 1e-9) ++out.violations;
    const double lower = growth * std::pow(r.i / u.pnu(), u.pnu());
    if (r.A < lower * (1.0 - 1e-10)) ++out.growth_violations;
    out.worst_ratio = std::max(out.worst_ratio, (r.f - ref.f) / (h / r.A + 1e-9));
  }
  return out;
}

Verdict criterion_certificate(bool growth) {
  const ProblemInstance quad = quadratic_problem();
  const ProblemInstance logi = logistic_problem();
  const CertificateCheck a = certify(quad, exact_cfg(quad.L_hessian));
  const CertificateCheck b = certify(logi, exact_cfg(logi.L_hessian));
  std::ostringstream d;
  if (growth) {
    d << "growth violations quadratic " << a.growth_violations << "/" << a.iterations << ", logistic "
      << b.growth_violations << "/" << b.iterations;
    return {a.growth_violations == 0 && b.growth_violations == 0 && a.iterations > 0 && b.iterations > 0, d.str()};
  }
  d << "violations quadratic " << a.violations << "/" << a.iterations << ", logistic " << b.violations << "/"
    << b.iterations << ", worst gap/bound " << fmt("%.3g", std::max(a.worst_ratio, b.worst_ratio));
  return {a.violations == 0 && b.violations == 0 && a.iterations > 0 && b.iterations > 0, d.str()};
}

UafConfig heuristic_cfg(double L, double q) {
  UafConfig u;
  u.p = 2;
  u.nu = 1.0;
  u.q = q;
  u.alpha = 1.0;
  u.theta1 = 0.5;
  u.theta2 = 0.67;
  u.L = L;
  u.strategy = Strategy::Heuristic;
  u.max_iter = 200;
  return u;
}

Verdict criterion_indicator() {
  const ProblemInstance logi = logistic_problem();
  std::ostringstream d;
  bool any = false;
  for (double L : l_grid()) {
    const RunResult run = uaf::run(*logi.oracle, heuristic_cfg(L, 2.0), logi.x0);
    int bad = 0;
    for (const auto& r : run.trace) {
      if (r.i >= 5 && !(r.omega > 0.0 && r.omega < 1.0)) ++bad;
    }
    const bool ok = bad == 0 && run.trace.size() == 200;
    d << "L=" << L << (ok ? ":ok " : ":" + std::to_string(bad) + "bad ");
    any = any || ok;
  }
  return {any, d.str()};
}

int iterations_to_gap(const ProblemInstance& inst, UafConfig u, double f_ref, double target, int cap) {
  u.max_iter = cap;
  u.f_ref = f_ref;
  u.stop_gap = target;
  try {
    const RunResult run = uaf::run(*inst.oracle, u, inst.x0);
    for (const auto& r : run.trace) {
      if (r.f - f_ref <= target) return r.i;
    }
  } catch (const Error&) {
  }
  return std::numeric_limits<int>::max();
}

Verdict criterion_rate_ordering() {
  const ProblemInstance logi = logistic_problem();
  const double f_ref = reference_solution(*logi.oracle, logi.x0, 200).f;
  constexpr int kNever = std::numeric_limits<int>::max();
  std::ostringstream d;
  std::vector<int> best;
  for (double q : {2.0, 2.5, 3.0}) {
    int b = kNever;
    double best_L = 0.0;
    d << "q=" << q << " [";
    for (double L : l_grid()) {
      UafConfig u = heuristic_cfg(L, q);
      if (q == u.pnu()) u.strategy = Strategy::ExactQEqualsPNu;
      const int it = iterations_to_gap(logi, u, f_ref, 1e-8, 2000);
      d << (it == kNever ? std::string("-") : std::to_string(it)) << (L == l_grid().back() ? "" : " ");
      if (it < b) {
        b = it;
        best_L = L;
      }
    }
    best.push_back(b);
    d << "] best " << (b == kNever ? std::string("none") : std::to_string(b)) << " at L=" << best_L << "; ";
  }
  const bool ok = best[0] != kNever && best[0] <= best[1] && best[1] <= best[2];
  return {ok, d.str()};
}

Verdict criterion_bisection() {
  const ProblemInstance logi = logistic_problem();
  const ReferenceSolution ref = reference_solution(*logi.oracle, logi.x0, 200);
  UafConfig u = heuristic_cfg(logi.L_hessian, 2.0);
  u.strategy = Strategy::Bisection;
  u.max_iter = 100;
  const RunResult run = uaf::run(*logi.oracle, u, logi.x0);
  const double h = proxy_value(ref.x, logi.x0, u.q);
  int omega_bad = 0;
  int cert_bad = 0;
  for (const auto& r : run.trace) {
    if (r.omega < u.theta1 || r.omega > u.theta2) ++omega_bad;
    if (r.f - ref.f > h / r.A + 1e-9) ++cert_bad;
  }
  std::ostringstream d;
  d << run.trace.size() << " accepted iterations" << (run.converged ? " (converged)" : "") << ", omega outside ["
    << u.theta1 << ", " << u.theta2 << "]: " << omega_bad << ", certificate violations: " << cert_bad;
  return {!run.trace.empty() && omega_bad == 0 && cert_bad == 0, d.str()};
}

Verdict criterion_restart() {
  Vec diag(10);
  for (int i = 0; i < 10; ++i) diag[i] = i + 1.0;
  const auto f = make_diagonal_quadratic(diag, Vec::Zero(10));
  Vec x0(10);
  for (int i = 0; i < 10; ++i) x0[i] = 1.0 / (i + 1.0);
  UafConfig u;
  u.p = 1;
  u.nu = 1.0;
  u.q = 2.0;
  u.L = f->gradient_lipschitz();
  u.strategy = Strategy::ExactQEqualsPNu;
  const RateConstants rc = uaf_rate_constants(u);
  RestartConfig rcfg;
  rcfg.s = 2.0;
  rcfg.sigma = 1.0;
  rcfg.v = rc.v;
  rcfg.r = rc.r;
  rcfg.c_A = rc.c_A;
  rcfg.R = x0.norm();
  rcfg.K = 8;
  const RestartResult res = run_restarted(uaf_inner_solver(*f, u), rcfg, x0, [&](const Vec& x) { return f->value(x); });
  const auto k0 = restart_k0(rcfg);
  const int kmax = std::min(rcfg.K, k0 ? *k0 : rcfg.K);
  int bad = 0;
  for (const auto& e : res.epochs) {
    if (e.k < 1 || e.k > kmax) continue;
    const double bound = rcfg.sigma / (2.0 * std::pow(4.0, e.k)) * x0.squaredNorm();
    if (e.f > bound + 1e-10) ++bad;
  }
  std::ostringstream d;
  d << "c_A=" << rc.c_A << " m0=" << restart_m0(rcfg) << " epochs=" << res.epochs.size() - 1
    << " inner=" << res.total_inner << " violations=" << bad;
  return {bad == 0 && static_cast<int>(res.epochs.size()) == rcfg.K + 1, d.str()};
}

Verdict criterion_continuum() {
  const auto f = make_diagonal_quadratic(Vec::Ones(2), Vec::Zero(2));
  DynamicsSpec spec;
  spec.schedule = power_schedule(2.0);
  spec.oracle = f.get();
  spec.x0 = Vec::Unit(2, 0);
  spec.T = 10.0;
  spec.dt = 1e-4;
  spec.record_every = 1000;
  const Trajectory traj = integrate(spec);
  const double fT = f->value(traj.x.back());
  const double bound = 1.05 * 0.5 / spec.schedule.A(traj.t.back());
  std::ostringstream d;
  d << "t=" << traj.t.back() << " f(x_T)=" << fmt("%.4g", fT) << " bound=" << fmt("%.4g", bound);
  return {std::abs(traj.t.back() - 10.0) < 1e-9 && fT <= bound, d.str()};
}

Verdict criterion_subsolver() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> logm(-3.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = dim(rng);
    Mat g = Mat::NullaryExpr(d, d, [&] { return normal(rng); });
    Mat h = 0.5 * (g + g.transpose());
    Vec grad = Vec::NullaryExpr(d, [&] { return normal(rng); });
    const TaylorModel model = TaylorModel::second_order(Vec::Zero(d), 0.0, grad, h);
    StepSpec spec{&model, std::pow(10.0, logm(rng)), 3.0};
    const StepResult exact = cubic_step_exact(spec);
    const StepResult krylov = cubic_step_krylov(spec, d, 1e-12);
    const double rel = (exact.x_new - krylov.x_new).norm() / std::max(exact.x_new.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  return {worst <= 1e-7, "worst relative difference " + fmt("%.3g", worst)};
}

Verdict criterion_model_bounds() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::ostringstream d;
  int total_bad = 0;
  auto sweep = [&](const char* name, const ObjectiveOracle& oracle, double L2, double L1) {
    int bad = 0;
    const int n = oracle.dim();
    for (int t = 0; t < 1000; ++t) {
      const Vec x = Vec::NullaryExpr(n, [&] { return box(rng); });
      const Vec y = Vec::NullaryExpr(n, [&] { return box(rng); });
      if (!model_error_bounds(oracle, y, x, 2, 1.0, L2).holds()) ++bad;
      if (!model_error_bounds(oracle, y, x, 1, 1.0, L1).holds()) ++bad;
    }
    d << name << ":" << bad << " ";
    total_bad += bad;
  };
  const ProblemInstance logi = logistic_problem();
  sweep("logistic", *logi.oracle, logi.L_hessian, logi.L_gradient);
  const ProblemInstance quad = quadratic_problem();
  sweep("quadratic", *quad.oracle, quad.L_hessian, quad.L_gradient);
  ExperimentConfig lc;
  lc.problem = "l1ls";
  lc.n = 10;
  lc.d = 20;
  const ProblemInstance l1 = build_problem(lc);
  sweep("l1ls", *l1.oracle, l1.L_hessian, l1.L_gradient);
  return {total_bad == 0, "violations " + d.str()};
}

Verdict criterion_lemmas() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int bad1 = 0, bad2 = 0, bad3 = 0, bad4 = 0;
  for (int t = 0; t < 10000; ++t) {
    if (check_seq_lemma_1(make_lemma_1_case(rng, len(rng))) != CheckOutcome::holds) ++bad1;
    if (check_seq_lemma_2(make_lemma_2_case(rng, len(rng))) != CheckOutcome::holds) ++bad2;
    const double s = std::pow(10.0, 4.0 * u01(rng) - 2.0);
    const double tt = std::pow(10.0, 4.0 * u01(rng) - 2.0);
    const double q = 2.0 + 4.0 * u01(rng);
    const double sigma = std::pow(10.0, 4.0 * u01(rng) - 2.0);
    if (!check_young_type(s, tt, q, sigma)) ++bad3;
    const BjlCase b = make_bjl_case(rng, len(rng));
    if (check_bjl(b.B, b.c, b.upsilon) != CheckOutcome::holds) ++bad4;
  }
  std::ostringstream d;
  d << "counterexamples lemma1=" << bad1 << " lemma2=" << bad2 << " young=" << bad3 << " bjl=" << bad4;
  return {bad1 + bad2 + bad3 + bad4 == 0, d.str()};
}

SparseDataset random_dataset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rows(0, 30);
  std::uniform_int_distribution<int> dim(1, 50);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  SparseDataset data;
  const int d = dim(rng);
  const int n = rows(rng);
  for (int i = 0; i < n; ++i) {
    SparseRow row;
    row.label = u01(rng) < 0.5 ? -1.0 : 1.0;
    for (int j = 1; j <= d; ++j) {
      if (u01(rng) < 0.3) row.features.push_back({j, normal(rng) * std::pow(10.0, 6.0 * u01(rng) - 3.0)});
    }
    for (const auto& e : row.features) data.d = std::max(data.d, e.index);
    data.rows.push_back(std::move(row));
  }
  return data;
}

Verdict criterion_parser() {
  std::mt19937_64 rng(11);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const SparseDataset data = random_dataset(rng);
    if (!(parse_libsvm(to_libsvm(data)) == data)) ++mismatches;
  }
  struct Bad {
    const char* text;
    std::size_t line;
  };
  const std::vector<Bad> bad{
      {"+1 2:1 1:3\n", 1},
      {"1 1:0.5\n-1 2:1 2:3\n", 2},
      {"1 1:0.5\n\nabc 1:1\n", 3},
      {"1 1:0.5\n-1 2x1\n", 2},
      {"1 1:0.5\n1 1:0.5\n-1 0:1\n", 3},
      {"1 x:1\n", 1},
      {"# header\n1 1:y\n", 2},
      {"1 1:0.5\n2 1:1\n", 2},
  };
  int wrong_line = 0;
  for (const auto& b : bad) {
    try {
      parse_libsvm(std::string(b.text));
      ++wrong_line;
    } catch (const ParseError& e) {
      if (e.line() != b.line) ++wrong_line;
    }
  }
  std::ostringstream d;
  d << "round-trip mismatches " << mismatches << "/1000, malformed cases misreported " << wrong_line << "/"
    << bad.size();
  return {mismatches == 0 && wrong_line == 0, d.str()};
}

std::string strip_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    out += line.substr(0, line.rfind(','));
    out += '\n';
  }
  return out;
}

Verdict criterion_determinism() {
  std::ostringstream d;
  bool ok = true;
  for (const char* solver : {"uaf", "svrg"}) {
    ExperimentConfig c;
    c.problem = "logistic";
    c.solver = solver;
    c.uaf = heuristic_cfg(1.0, 2.5);
    c.uaf.max_iter = 60;
    c.svrg.epochs = 5;
    const std::string first = strip_wall(trace_csv(run_experiment(c).trace));
    const std::string second = strip_wall(trace_csv(run_experiment(c).trace));
    const bool same = first == second && first.size() > 100;
    d << solver << (same ? ":identical " : ":differs ");
    ok = ok && same;
  }
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "certificate bound", 30, [] { return criterion_certificate(false); }},
      {2, "A_k growth", 30, [] { return criterion_certificate(true); }},
      {3, "indicator in (0,1)", 60, criterion_indicator},
      {4, "rate ordering", 120, criterion_rate_ordering},
      {5, "bisection validity", 120, criterion_bisection},
      {6, "restart linear phase", 10, criterion_restart},
      {7, "continuous-time rate", 10, criterion_continuum},
      {8, "subsolver equivalence", 30, criterion_subsolver},
      {9, "model bounds", 600, criterion_model_bounds},
      {10, "lemma property suite", 30, criterion_lemmas},
      {11, "parser", 600, criterion_parser},
      {12, "determinism", 600, criterion_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && secs <= c.budget_s;
    if (!pass) ++failed;
    std::printf("%s  %2d  %-24s %7.2fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, v.detail.c_str(),
                v.pass && !pass ? " (over time budget)" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
