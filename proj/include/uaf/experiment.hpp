#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uaf/baselines.hpp"
#include "uaf/restart.hpp"
#include "uaf/uaf.hpp"

namespace uaf {

/// One CSV row: iter,f,gap,omega,lambda,A,disp,wall_s. Missing values are empty fields.
struct TraceRecord {
  int iter = 0;
  double f = 0.0;
  std::optional<double> gap;
  std::optional<double> omega;
  std::optional<double> lambda;
  std::optional<double> A;
  std::optional<double> disp;
  double wall_s = 0.0;
};

inline constexpr const char* kTraceHeader = "iter,f,gap,omega,lambda,A,disp,wall_s";

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows);
std::string trace_csv(const std::vector<TraceRecord>& rows);
/// Throws ParseError on a bad header or row.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

std::vector<TraceRecord> to_trace(const RunResult& run, std::optional<double> f_ref);

struct FitWindow {
  int lo = 1;
  int hi = 1 << 30;
};

/// Least-squares slope of log(gap) against log(iter) over rows with lo <= iter <= hi
/// and gap > floor. With auto_shrink the window is cut at the first row at or
/// below the floor instead of skipping such rows. Fewer than 3 usable rows throw fit.
double fit_rate(const std::vector<TraceRecord>& trace, FitWindow window, bool auto_shrink = false,
                double floor = 1e-15);

/// Rows where f - f_ref > h_ref / A + slack.
int certificate_violations(const std::vector<TraceRecord>& trace, double f_ref, double h_ref, double slack = 1e-9);

struct ReferenceSolution {
  Vec x;
  double f = 0.0;
  /// Estimated suboptimality of x (Newton decrement or prox-gradient residual based).
  double gap_estimate = 0.0;
  bool high_quality = false;
  bool from_cache = false;
};

/// High-accuracy minimizer used for gaps and certificates. Smooth problems use
/// damped Newton-CG after a short warm start; composite problems use FISTA.
/// Results are cached under cache_dir (or $UAF_CACHE_DIR) keyed by the oracle
/// fingerprint; budget counts outer iterations.
ReferenceSolution reference_solution(const ObjectiveOracle& oracle, const Vec& x0, int budget,
                                     std::optional<std::string> cache_dir = std::nullopt);

/// Experiment description shared by the CLI and the tests.
struct ExperimentConfig {
  // problem
  std::string problem = "logistic";  // logistic | quadratic | l1ls | libsvm
  std::string data;                  // path for problem = libsvm
  int n = 500;
  int d = 20;
  std::uint64_t seed = 1;
  double ridge = 0.0;
  double reg = 0.1;      // l1 weight for l1ls
  double cond = 10.0;    // condition number for quadratic

  // solver
  std::string solver = "uaf";  // uaf | uaf-restart | svrg | gd | continuum
  UafConfig uaf;
  bool auto_L = true;  // logistic: smoothness constant; quadratic: default Hoelder constant
  RestartConfig restart;
  SvrgConfig svrg;
  double gd_step = 0.0;  // 0 means 1/L_grad
  int gd_iters = 1000;
  double ct_T = 10.0;
  double ct_dt = 1e-3;
  double ct_p = 2.0;

  // reference and reporting
  bool reference = true;
  int reference_budget = 200;
  FitWindow fit;
  bool fit_auto_shrink = true;

  // outputs
  std::string out_csv;
  std::string out_json;

  void validate() const;
};

struct ProblemInstance {
  std::shared_ptr<const ObjectiveOracle> oracle;
  std::shared_ptr<const SparseDataset> data;  // logistic problems only
  Vec x0;
  /// Smoothness constant for (p, nu) = (2, 1) and the gradient Lipschitz constant.
  double L_hessian = 1.0;
  double L_gradient = 1.0;
};

ProblemInstance build_problem(const ExperimentConfig& cfg);

struct ExperimentOutcome {
  std::vector<TraceRecord> trace;
  std::string summary_json;
  std::optional<double> f_ref;
  std::optional<double> h_ref;
  int certificate_violations = 0;
  int indicator_violations = 0;
};

/// Runs one experiment and writes out_csv / out_json when set. Config problems
/// throw invalid_config before any file is touched.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes text to path through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace uaf
