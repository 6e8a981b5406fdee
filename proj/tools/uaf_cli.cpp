// uaf: experiment driver.
//
//   uaf run --config exp.cfg --q 2.5
//   uaf matrix --q_grid 2,2.5,3 --L_grid 0.01,0.1,1 --out_dir runs
//   uaf check-certificate --csv trace.csv --h_ref 0.3
//   uaf integrate --problem quadratic --T 10 --dt 1e-4 --out_csv ct.csv
//
// Config files hold one "key = value" per line with '#' comments; keys are the
// long flag names without dashes. Flags given on the command line win.
//
// Exit codes: 0 success, 1 solver error, 2 config error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uaf/experiment.hpp"

namespace {

using uaf::ExperimentConfig;

struct ConfigLine {
  std::string key;
  std::string value;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<ConfigLine> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw uaf::Error(uaf::Errc::invalid_config, "cannot open config '" + path + "'");
  std::vector<ConfigLine> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw uaf::ParseError(no, "expected key = value in '" + path + "'");
    out.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return out;
}

/// Config-file entries become flags placed before the real ones, so that the
/// command line overrides them (options keep their last value).
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  std::string config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty()) return rest;
  if (rest.empty()) throw uaf::Error(uaf::Errc::invalid_config, "a subcommand is required");
  out.push_back(rest.front());
  for (const auto& kv : read_config_file(config)) out.push_back("--" + kv.key + "=" + kv.value);
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

struct Flags {
  ExperimentConfig cfg;
  std::string strategy = "exact";
  std::string policy = "warn";
  std::string subsolver = "auto";
  double gamma = 0.0;
  double beta = 0.0;
  double h_star = 0.0;
  double stop_gap = 0.0;
};

void add_experiment_options(CLI::App* app, Flags& f) {
  auto& c = f.cfg;
  app->add_option("--problem", c.problem, "logistic | quadratic | l1ls | libsvm");
  app->add_option("--data", c.data, "LIBSVM file for problem = libsvm");
  app->add_option("--n", c.n, "samples (synthetic problems)");
  app->add_option("--d", c.d, "dimension (synthetic problems)");
  app->add_option("--seed", c.seed);
  app->add_option("--ridge", c.ridge);
  app->add_option("--reg", c.reg, "l1 weight for l1ls");
  app->add_option("--cond", c.cond, "condition number for quadratic");

  app->add_option("--solver", c.solver, "uaf | uaf-restart | svrg | gd | continuum");
  app->add_option("--p", c.uaf.p);
  app->add_option("--nu", c.uaf.nu);
  app->add_option("--L", c.uaf.L, "smoothness constant; overrides the problem's own");
  app->add_option("--q", c.uaf.q);
  app->add_option("--alpha", c.uaf.alpha);
  app->add_option("--theta1", c.uaf.theta1);
  app->add_option("--theta2", c.uaf.theta2);
  app->add_option("--gamma", f.gamma);
  app->add_option("--beta", f.beta);
  app->add_option("--strategy", f.strategy, "exact | heuristic | bisection");
  app->add_option("--h_star", f.h_star, "h(x*;x0) estimate for the heuristic schedule");
  app->add_option("--pilot_iters", c.uaf.pilot_iters);
  app->add_option("--violation_policy", f.policy, "warn | fallback");
  app->add_option("--bracket_growth", c.uaf.bracket_growth);
  app->add_option("--max_iter", c.uaf.max_iter);
  app->add_option("--stop_gap", f.stop_gap, "stop once f - f_ref drops below this");
  app->add_option("--subsolver", f.subsolver, "auto | exact | krylov | generic");
  app->add_option("--inner_tol", c.uaf.subsolver.tol);
  app->add_option("--krylov_dim", c.uaf.subsolver.max_krylov_dim);

  app->add_option("--restart_s", c.restart.s);
  app->add_option("--restart_sigma", c.restart.sigma);
  app->add_option("--restart_R", c.restart.R);
  app->add_option("--restart_K", c.restart.K);

  app->add_option("--svrg_lr", c.svrg.learning_rate);
  app->add_option("--svrg_epoch_length", c.svrg.epoch_length);
  app->add_option("--svrg_epochs", c.svrg.epochs);
  app->add_option("--svrg_seed", c.svrg.rng_seed);
  app->add_option("--gd_step", c.gd_step);
  app->add_option("--gd_iters", c.gd_iters);

  app->add_option("--T", c.ct_T);
  app->add_option("--dt", c.ct_dt);
  app->add_option("--ct_p", c.ct_p);

  app->add_option("--reference", c.reference);
  app->add_option("--reference_budget", c.reference_budget);
  app->add_option("--fit_lo", c.fit.lo);
  app->add_option("--fit_hi", c.fit.hi);
  app->add_option("--fit_auto_shrink", c.fit_auto_shrink);

  app->add_option("--out_csv", c.out_csv);
  app->add_option("--out_json", c.out_json);
}

void finalize(const CLI::App* app, Flags& f) {
  auto& u = f.cfg.uaf;
  u.strategy = uaf::parse_strategy(f.strategy);
  if (f.policy == "warn") {
    u.violation_policy = uaf::ViolationPolicy::warn;
  } else if (f.policy == "fallback") {
    u.violation_policy = uaf::ViolationPolicy::fallback;
  } else {
    throw uaf::Error(uaf::Errc::invalid_config, "unknown violation_policy '" + f.policy + "'");
  }
  if (f.subsolver == "auto") {
    u.subsolver.kind = uaf::SubsolverKind::automatic;
  } else if (f.subsolver == "exact") {
    u.subsolver.kind = uaf::SubsolverKind::exact;
  } else if (f.subsolver == "krylov") {
    u.subsolver.kind = uaf::SubsolverKind::krylov;
  } else if (f.subsolver == "generic") {
    u.subsolver.kind = uaf::SubsolverKind::generic;
  } else {
    throw uaf::Error(uaf::Errc::invalid_config, "unknown subsolver '" + f.subsolver + "'");
  }
  if (app->count("--gamma")) u.gamma = f.gamma;
  if (app->count("--beta")) u.beta = f.beta;
  if (app->count("--h_star")) u.h_star_estimate = f.h_star;
  if (app->count("--stop_gap")) u.stop_gap = f.stop_gap;
  if (app->count("--L")) f.cfg.auto_L = false;
}

std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw uaf::Error(uaf::Errc::invalid_config, std::string("bad value in ") + name + ": '" + item + "'");
    }
  }
  if (out.empty()) throw uaf::Error(uaf::Errc::invalid_config, std::string(name) + " is empty");
  return out;
}

std::string grid_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

int cmd_run(Flags& f) {
  const auto out = uaf::run_experiment(f.cfg);
  std::cout << out.summary_json;
  return 0;
}

int cmd_matrix(Flags& f, const std::string& q_grid, const std::string& L_grid, const std::string& out_dir) {
  const auto qs = parse_grid(q_grid, "q_grid");
  const auto Ls = L_grid.empty() ? std::vector<double>{} : parse_grid(L_grid, "L_grid");
  f.cfg.validate();
  nlohmann::json rows = nlohmann::json::array();
  int failures = 0;
  for (double q : qs) {
    const std::vector<double> grid = Ls.empty() ? std::vector<double>{-1.0} : Ls;
    for (double L : grid) {
      ExperimentConfig c = f.cfg;
      c.uaf.q = q;
      if (L > 0.0) {
        c.uaf.L = L;
        c.auto_L = false;
      }
      if (c.uaf.strategy == uaf::Strategy::ExactQEqualsPNu && q < c.uaf.pnu()) c.uaf.strategy = uaf::Strategy::Heuristic;
      const std::string tag = "q" + grid_tag(q) + (L > 0.0 ? "_L" + grid_tag(L) : "");
      if (!out_dir.empty()) {
        c.out_csv = out_dir + "/" + tag + ".csv";
        c.out_json = out_dir + "/" + tag + ".json";
      }
      nlohmann::json row = {{"q", q}, {"L", c.auto_L ? nlohmann::json("auto") : nlohmann::json(c.uaf.L)}};
      try {
        const auto out = uaf::run_experiment(c);
        row["summary"] = nlohmann::json::parse(out.summary_json);
      } catch (const uaf::Error& e) {
        if (e.code() == uaf::Errc::invalid_config) throw;
        row["error"] = e.what();
        ++failures;
      }
      std::cout << tag << ": " << row.dump() << "\n";
      rows.push_back(row);
    }
  }
  if (!out_dir.empty()) uaf::write_file_atomic(out_dir + "/matrix.json", rows.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

int cmd_check_certificate(const std::string& csv, std::optional<double> f_ref, double h_ref, double slack) {
  std::ifstream in(csv);
  if (!in) throw uaf::Error(uaf::Errc::invalid_config, "cannot open '" + csv + "'");
  const auto trace = uaf::read_trace_csv(in);
  if (!f_ref) {
    for (const auto& r : trace) {
      if (r.gap) {
        f_ref = r.f - *r.gap;
        break;
      }
    }
  }
  if (!f_ref) throw uaf::Error(uaf::Errc::invalid_config, "no f_ref given and the trace has no gap column");
  const int bad = uaf::certificate_violations(trace, *f_ref, h_ref, slack);
  std::cout << (bad == 0 ? "PASS" : "FAIL") << " " << trace.size() << " rows, " << bad << " violations\n";
  return bad == 0 ? 0 : 1;
}

bool is_config_error(uaf::Errc code) {
  return code == uaf::Errc::invalid_config || code == uaf::Errc::parse || code == uaf::Errc::invalid_argument;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated high-order convex optimization experiments"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Flags flags;
  auto* run = app.add_subcommand("run", "run one experiment");
  add_experiment_options(run, flags);

  auto* matrix = app.add_subcommand("matrix", "run a grid over q and L");
  add_experiment_options(matrix, flags);
  std::string q_grid = "2,2.5,3";
  std::string L_grid;
  std::string out_dir;
  matrix->add_option("--q_grid", q_grid, "comma-separated q values");
  matrix->add_option("--L_grid", L_grid, "comma-separated L values (default: problem constant)");
  matrix->add_option("--out_dir", out_dir);

  auto* check = app.add_subcommand("check-certificate", "check f - f_ref <= h_ref / A on a trace");
  std::string csv;
  double f_ref = 0.0;
  double h_ref = 0.0;
  double slack = 1e-9;
  check->add_option("--csv", csv)->required();
  auto* f_ref_opt = check->add_option("--f_ref", f_ref, "default: recovered from the gap column");
  check->add_option("--h_ref", h_ref)->required();
  check->add_option("--slack", slack);

  auto* integrate = app.add_subcommand("integrate", "integrate the continuous-time dynamics");
  add_experiment_options(integrate, flags);

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const uaf::Error& e) {
    std::cerr << "uaf: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run) {
      finalize(run, flags);
      return cmd_run(flags);
    }
    if (*matrix) {
      finalize(matrix, flags);
      return cmd_matrix(flags, q_grid, L_grid, out_dir);
    }
    if (*check) {
      return cmd_check_certificate(csv, f_ref_opt->count() ? std::optional<double>(f_ref) : std::nullopt, h_ref,
                                   slack);
    }
    finalize(integrate, flags);
    flags.cfg.solver = "continuum";
    if (!integrate->count("--problem")) flags.cfg.problem = "quadratic";
    return cmd_run(flags);
  } catch (const uaf::Error& e) {
    std::cerr << "uaf: " << e.what() << "\n";
    return is_config_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "uaf: " << e.what() << "\n";
    return 1;
  }
}
