#include "uaf/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "uaf/continuum.hpp"

namespace uaf {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hexfloat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::optional<double> parse_field(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

void append_opt(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += fmt17(*v);
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows) { out << trace_csv(rows); }

std::string trace_csv(const std::vector<TraceRecord>& rows) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.iter);
    out += ',';
    out += fmt17(r.f);
    append_opt(out, r.gap);
    append_opt(out, r.omega);
    append_opt(out, r.lambda);
    append_opt(out, r.A);
    append_opt(out, r.disp);
    out += ',';
    out += fmt17(r.wall_s);
    out += '\n';
  }
  return out;
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError(1, "unexpected header '" + line + "'");
  std::vector<TraceRecord> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) throw ParseError(line_no, "expected 8 columns");
    TraceRecord r;
    const auto iter = parse_field(cells[0], line_no);
    const auto f = parse_field(cells[1], line_no);
    if (!iter || !f) throw ParseError(line_no, "iter and f are required");
    r.iter = static_cast<int>(*iter);
    r.f = *f;
    r.gap = parse_field(cells[2], line_no);
    r.omega = parse_field(cells[3], line_no);
    r.lambda = parse_field(cells[4], line_no);
    r.A = parse_field(cells[5], line_no);
    r.disp = parse_field(cells[6], line_no);
    r.wall_s = parse_field(cells[7], line_no).value_or(0.0);
    rows.push_back(r);
  }
  return rows;
}

std::vector<TraceRecord> to_trace(const RunResult& run, std::optional<double> f_ref) {
  std::vector<TraceRecord> rows;
  rows.reserve(run.trace.size());
  for (const auto& it : run.trace) {
    TraceRecord r;
    r.iter = it.i;
    r.f = it.f;
    if (f_ref) r.gap = it.f - *f_ref;
    r.omega = it.omega;
    r.lambda = it.lambda;
    r.A = it.A;
    r.disp = it.disp;
    r.wall_s = it.wall_s;
    rows.push_back(r);
  }
  return rows;
}

double fit_rate(const std::vector<TraceRecord>& trace, FitWindow window, bool auto_shrink, double floor) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : trace) {
    if (r.iter < window.lo || r.iter > window.hi || r.iter < 1) continue;
    if (!r.gap || !(*r.gap > floor)) {
      if (auto_shrink) break;
      throw Error(Errc::fit, "gap missing or at the floor at iteration " + std::to_string(r.iter));
    }
    xs.push_back(std::log(static_cast<double>(r.iter)));
    ys.push_back(std::log(*r.gap));
  }
  if (xs.size() < 3) throw Error(Errc::fit, "fewer than 3 usable points in the fit window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  require(sxx > 0.0, Errc::fit, "fit window spans a single iteration");
  return sxy / sxx;
}

int certificate_violations(const std::vector<TraceRecord>& trace, double f_ref, double h_ref, double slack) {
  int count = 0;
  for (const auto& r : trace) {
    if (!r.A || !(*r.A > 0.0)) continue;
    if (r.f - f_ref > h_ref / *r.A + slack) ++count;
  }
  return count;
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), Errc::invalid_argument, "cannot write '" + tmp + "'");
    out << text;
    out.flush();
    require(static_cast<bool>(out), Errc::invalid_argument, "write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

namespace {

std::optional<ReferenceSolution> load_reference(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string tag;
  int version = 0;
  int n = 0;
  std::string f_text;
  std::string gap_text;
  int quality = 0;
  std::string key;
  if (!(in >> tag >> version) || tag != "uaf-reference" || version != 1) return std::nullopt;
  if (!(in >> key >> n) || key != "dim" || n != dim) return std::nullopt;
  if (!(in >> key >> f_text) || key != "f") return std::nullopt;
  if (!(in >> key >> gap_text) || key != "gap") return std::nullopt;
  if (!(in >> key >> quality) || key != "quality") return std::nullopt;
  ReferenceSolution ref;
  ref.f = std::strtod(f_text.c_str(), nullptr);
  ref.gap_estimate = std::strtod(gap_text.c_str(), nullptr);
  ref.high_quality = quality != 0;
  ref.x.resize(n);
  for (int i = 0; i < n; ++i) {
    std::string v;
    if (!(in >> v)) return std::nullopt;
    ref.x[i] = std::strtod(v.c_str(), nullptr);
  }
  ref.from_cache = true;
  return ref;
}

std::string dump_reference(const ReferenceSolution& ref) {
  std::string out = "uaf-reference 1\ndim " + std::to_string(ref.x.size()) + "\nf " + hexfloat(ref.f) + "\ngap " +
                    hexfloat(ref.gap_estimate) + "\nquality " + (ref.high_quality ? "1" : "0") + "\n";
  for (Eigen::Index i = 0; i < ref.x.size(); ++i) out += hexfloat(ref.x[i]) + "\n";
  return out;
}

// Damped Newton with a dense factorization when affordable and CG otherwise.
ReferenceSolution newton_reference(const ObjectiveOracle& oracle, const Vec& x0, int budget) {
  Vec x = x0;
  double f = oracle.value(x);
  double decrement = std::numeric_limits<double>::infinity();
  const int d = oracle.dim();
  for (int it = 0; it < budget; ++it) {
    const Vec g = oracle.gradient(x);
    Vec step;
    if (d <= 500) {
      Mat h = dense_hessian(oracle, x);
      Eigen::LDLT<Mat> ldlt(h);
      step = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !step.allFinite() || !(step.dot(g) < 0.0)) {
        const double shift = 1e-12 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
        h.diagonal().array() += shift;
        step = -h.ldlt().solve(g);
      }
    } else {
      step = Vec::Zero(d);
      Vec r = -g;
      Vec p = r;
      double rr = r.squaredNorm();
      for (int k = 0; k < 2 * d && std::sqrt(rr) > 1e-14 * g.norm(); ++k) {
        const Vec hp = oracle.hess_vec(x, p);
        const double curv = p.dot(hp);
        if (curv <= 0.0) break;
        const double a = rr / curv;
        step += a * p;
        r -= a * hp;
        const double next = r.squaredNorm();
        p = r + (next / rr) * p;
        rr = next;
      }
      if (!(step.dot(g) < 0.0)) step = -g;
    }
    decrement = -step.dot(g);
    if (!(decrement > 0.0) || decrement <= 1e-30) {
      decrement = std::max(0.0, decrement);
      break;
    }
    double t = 1.0;
    Vec trial = x + step;
    double ft = oracle.value(trial);
    while (!(ft <= f - 1e-4 * t * decrement) && t > 1e-12) {
      t *= 0.5;
      trial = x + t * step;
      ft = oracle.value(trial);
    }
    if (!(ft <= f)) break;
    const bool tiny = (trial - x).norm() <= 1e-15 * std::max(1.0, x.norm());
    x = std::move(trial);
    f = ft;
    if (decrement < 1e-24 || tiny) break;
  }
  ReferenceSolution ref;
  ref.x = std::move(x);
  ref.f = f;
  ref.gap_estimate = std::isfinite(decrement) ? 0.5 * decrement : std::numeric_limits<double>::infinity();
  ref.high_quality = ref.gap_estimate < 1e-12;
  return ref;
}

// FISTA with backtracking and function-value restarts.
ReferenceSolution fista_reference(const ObjectiveOracle& oracle, const Vec& x0, int iterations) {
  const SimpleConvexTerm* l = oracle.composite_part();
  double L = 1.0;
  Vec x = x0;
  Vec y = x0;
  double t = 1.0;
  double fx = oracle.value(x);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iterations; ++it) {
    const double gy_val = oracle.smooth_value(y);
    const Vec gy = oracle.gradient(y);
    Vec xn;
    while (true) {
      xn = l->prox(y - gy / L, 1.0 / L);
      const Vec diff = xn - y;
      if (oracle.smooth_value(xn) <= gy_val + gy.dot(diff) + 0.5 * L * diff.squaredNorm() + 1e-15 * std::abs(gy_val)) {
        break;
      }
      L *= 2.0;
    }
    residual = L * (xn - y).norm();
    const double fn = oracle.value(xn);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (fn > fx) {
      y = x;
      t = 1.0;
      continue;
    }
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x = std::move(xn);
    fx = fn;
    t = tn;
    if (residual <= 1e-13) break;
  }
  ReferenceSolution ref;
  ref.x = x;
  ref.f = fx;
  const Vec g = oracle.gradient(x);
  const double stat = l->subgradient_residual(x, g);
  ref.gap_estimate = stat * std::max(1.0, (x - x0).norm());
  ref.high_quality = stat <= 1e-9;
  return ref;
}

}  // namespace

ReferenceSolution reference_solution(const ObjectiveOracle& oracle, const Vec& x0, int budget,
                                     std::optional<std::string> cache_dir) {
  require(x0.size() == oracle.dim(), Errc::dimension_mismatch, "reference: x0 has wrong dimension");
  if (budget <= 0) {
    ReferenceSolution ref;
    ref.x = x0;
    ref.f = oracle.value(x0);
    ref.gap_estimate = std::numeric_limits<double>::infinity();
    ref.high_quality = false;
    return ref;
  }
  if (!cache_dir) {
    if (const char* env = std::getenv("UAF_CACHE_DIR"); env && *env) cache_dir = env;
  }
  const std::string key = oracle.fingerprint();
  std::string path;
  if (cache_dir && !key.empty()) {
    path = (std::filesystem::path(*cache_dir) / (key + ".ref")).string();
    if (auto cached = load_reference(path, oracle.dim())) return *cached;
  }
  ReferenceSolution ref = oracle.composite_part() ? fista_reference(oracle, x0, 100 * budget)
                                                  : newton_reference(oracle, x0, budget);
  if (!path.empty()) write_file_atomic(path, dump_reference(ref));
  return ref;
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, Errc::invalid_config, what); };
  check(problem == "logistic" || problem == "quadratic" || problem == "l1ls" || problem == "libsvm",
        "unknown problem '" + problem + "'");
  if (problem == "libsvm") {
    check(!data.empty(), "problem libsvm needs a data path");
    check(std::filesystem::is_regular_file(data), "dataset '" + data + "' not found");
  } else {
    check(n > 0 && d > 0, "n and d must be positive");
  }
  check(solver == "uaf" || solver == "uaf-restart" || solver == "svrg" || solver == "gd" || solver == "continuum",
        "unknown solver '" + solver + "'");
  check(ridge >= 0.0 && reg >= 0.0 && cond >= 1.0, "ridge, reg must be >= 0 and cond >= 1");
  if (solver == "uaf" || solver == "uaf-restart") {
    UafConfig probe = uaf;
    if (auto_L) probe.L = 1.0;
    probe.validate();
  }
  if (solver == "uaf-restart") restart.validate();
  if (solver == "svrg") check(problem == "logistic" || problem == "libsvm", "svrg needs a logistic problem");
  if (solver == "continuum") {
    check(problem != "l1ls", "continuum needs a smooth problem");
    check(ct_dt > 0.0 && ct_T > ct_dt, "continuum needs dt > 0 and T > dt");
    check(ct_p >= 1.0, "continuum schedule power must be >= 1");
  }
  if (solver == "gd") check(gd_iters >= 0 && gd_step >= 0.0, "gd step and iteration count must be >= 0");
  check(fit.lo >= 1 && fit.hi >= fit.lo, "fit window must satisfy 1 <= lo <= hi");
  check(reference_budget >= 0, "reference budget must be >= 0");
}

ProblemInstance build_problem(const ExperimentConfig& cfg) {
  ProblemInstance inst;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (cfg.problem == "logistic" || cfg.problem == "libsvm") {
    auto data = std::make_shared<const SparseDataset>(
        cfg.problem == "libsvm" ? load_libsvm(cfg.data) : make_synthetic_logistic(cfg.n, cfg.d, cfg.seed));
    inst.oracle = std::make_shared<LogisticObjective>(data, cfg.ridge);
    inst.data = data;
    inst.L_hessian = logistic_smoothness_constant(*data, 2.0, 1.0);
    inst.L_gradient = logistic_smoothness_constant(*data, 2.0, 0.0) / 4.0 + cfg.ridge;
  } else if (cfg.problem == "quadratic") {
    Mat g(cfg.d, cfg.d);
    for (int i = 0; i < cfg.d; ++i) {
      for (int j = 0; j < cfg.d; ++j) g(i, j) = normal(rng);
    }
    const Mat u = Eigen::HouseholderQR<Mat>(g).householderQ();
    Vec eig(cfg.d);
    for (int i = 0; i < cfg.d; ++i) {
      eig[i] = cfg.d == 1 ? 1.0 : std::pow(cfg.cond, static_cast<double>(i) / (cfg.d - 1));
    }
    Mat q = u * eig.asDiagonal() * u.transpose();
    q = 0.5 * (q + q.transpose());
    Vec b(cfg.d);
    for (int i = 0; i < cfg.d; ++i) b[i] = normal(rng);
    auto quad = std::make_shared<QuadraticObjective>(q, b);
    inst.L_gradient = quad->gradient_lipschitz();
    inst.L_hessian = kQuadraticHessianHolderConstant;
    inst.oracle = quad;
  } else {
    Mat a(cfg.n, cfg.d);
    for (int i = 0; i < cfg.n; ++i) {
      for (int j = 0; j < cfg.d; ++j) a(i, j) = normal(rng) / std::sqrt(static_cast<double>(cfg.n));
    }
    Vec truth = Vec::Zero(cfg.d);
    for (int j = 0; j < cfg.d; j += 4) truth[j] = normal(rng);
    Vec b = a * truth;
    for (int i = 0; i < cfg.n; ++i) b[i] += 0.01 * normal(rng);
    auto ls = std::make_shared<L1LeastSquares>(a, b, cfg.reg);
    inst.L_gradient = ls->gradient_lipschitz();
    inst.L_hessian = kQuadraticHessianHolderConstant;
    inst.oracle = ls;
  }
  inst.x0 = Vec::Zero(inst.oracle->dim());
  return inst;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemInstance inst = build_problem(cfg);
  const ObjectiveOracle& oracle = *inst.oracle;

  ExperimentOutcome out;
  std::optional<ReferenceSolution> ref;
  if (cfg.reference) {
    ref = reference_solution(oracle, inst.x0, cfg.reference_budget);
    out.f_ref = ref->f;
  }

  UafConfig ucfg = cfg.uaf;
  if (cfg.auto_L) ucfg.L = ucfg.p >= 2 ? inst.L_hessian : inst.L_gradient;
  ucfg.f_ref = out.f_ref;
  if (ref) out.h_ref = proxy_value(ref->x, inst.x0, ucfg.q);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  auto gap_of = [&](double f) { return out.f_ref ? std::optional<double>(f - *out.f_ref) : std::nullopt; };

  if (cfg.solver == "uaf") {
    const RunResult run = uaf::run(oracle, ucfg, inst.x0);
    out.trace = to_trace(run, out.f_ref);
    out.indicator_violations = run.indicator_violations;
  } else if (cfg.solver == "uaf-restart") {
    RestartConfig rcfg = cfg.restart;
    const RateConstants rc = uaf_rate_constants(ucfg);
    rcfg.c_A = rc.c_A;
    rcfg.r = rc.r;
    rcfg.v = rc.v;
    const RestartResult res =
        run_restarted(uaf_inner_solver(oracle, ucfg), rcfg, inst.x0, [&](const Vec& x) { return oracle.value(x); });
    for (const auto& e : res.epochs) out.trace.push_back({e.k, e.f, gap_of(e.f), {}, {}, {}, {}, elapsed()});
  } else if (cfg.solver == "svrg") {
    const auto& logistic = dynamic_cast<const LogisticObjective&>(oracle);
    const BaselineResult res = run_svrg(logistic, cfg.svrg, inst.x0);
    for (const auto& r : res.trace) out.trace.push_back({r.iter, r.f, gap_of(r.f), {}, {}, {}, {}, r.wall_s});
  } else if (cfg.solver == "gd") {
    const double step = cfg.gd_step > 0.0 ? cfg.gd_step : 1.0 / inst.L_gradient;
    const BaselineResult res = run_gd(oracle, step, cfg.gd_iters, inst.x0);
    for (const auto& r : res.trace) out.trace.push_back({r.iter, r.f, gap_of(r.f), {}, {}, {}, {}, r.wall_s});
  } else {
    DynamicsSpec spec;
    spec.schedule = power_schedule(cfg.ct_p);
    spec.oracle = &oracle;
    spec.x0 = inst.x0;
    spec.T = cfg.ct_T;
    spec.dt = cfg.ct_dt;
    const long steps = std::lround((cfg.ct_T - cfg.ct_dt) / cfg.ct_dt);
    spec.record_every = static_cast<int>(std::max(1L, steps / 1000));
    const Trajectory traj = integrate(spec);
    for (std::size_t j = 0; j < traj.x.size(); ++j) {
      const double f = oracle.value(traj.x[j]);
      out.trace.push_back({static_cast<int>(j), f, gap_of(f), {}, {}, spec.schedule.A(traj.t[j]), {}, elapsed()});
    }
    if (ref) out.h_ref = proxy_value(ref->x, inst.x0, 2.0);
  }

  if (out.f_ref && out.h_ref) out.certificate_violations = certificate_violations(out.trace, *out.f_ref, *out.h_ref);

  nlohmann::json summary;
  summary["solver"] = cfg.solver;
  summary["problem"] = cfg.problem;
  summary["iterations"] = out.trace.empty() ? 0 : out.trace.back().iter;
  summary["final_f"] = out.trace.empty() ? nlohmann::json(nullptr) : nlohmann::json(out.trace.back().f);
  summary["f_ref"] = opt_json(out.f_ref);
  summary["final_gap"] = out.trace.empty() ? nlohmann::json(nullptr) : opt_json(out.trace.back().gap);
  summary["h_ref"] = opt_json(out.h_ref);
  summary["certificate_violations"] = out.certificate_violations;
  summary["indicator_violations"] = out.indicator_violations;
  try {
    summary["slope"] = fit_rate(out.trace, cfg.fit, cfg.fit_auto_shrink);
  } catch (const Error&) {
    summary["slope"] = nullptr;
  }
  summary["fit_window"] = {cfg.fit.lo, std::min(cfg.fit.hi, out.trace.empty() ? 0 : out.trace.back().iter)};
  out.summary_json = summary.dump(2) + "\n";

  if (!cfg.out_csv.empty()) write_file_atomic(cfg.out_csv, trace_csv(out.trace));
  if (!cfg.out_json.empty()) write_file_atomic(cfg.out_json, out.summary_json);
  return out;
}

}  // namespace uaf
