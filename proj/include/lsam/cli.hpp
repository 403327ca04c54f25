#pragma once

// Command-line front end: simulate, oracle, spectral, bounds, verify, sweep.
// Exit codes: 0 success, 1 invalid input, 2 a verification suite failed.

#include "lsam/complexity.hpp"
#include "lsam/core.hpp"
#include "lsam/dynamics.hpp"
#include "lsam/io.hpp"
#include "lsam/problem.hpp"
#include "lsam/spectral.hpp"
#include "lsam/theory.hpp"
#include "lsam/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lsam {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitVerifyFailed = 2;

struct RunConfig {
  std::string subcommand;
  std::string problem;
  std::string method = "generic";
  std::optional<double> alpha, beta, eta, epsilon, K;
  std::int64_t trials = 10000;
  std::int64_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string grid = "fine";
  std::string suite = "all";
  std::string config;
  bool legacy_init = false;
  bool emit_plot_data = false;

  InitConvention init() const {
    return legacy_init ? InitConvention::legacy : InitConvention::zero_velocity;
  }

  Json echo() const {
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return Json{{"subcommand", subcommand}, {"problem", problem}, {"method", method},
                {"alpha", opt(alpha)}, {"beta", opt(beta)}, {"eta", opt(eta)},
                {"epsilon", opt(epsilon)}, {"K", opt(K)}, {"trials", trials}, {"n", n},
                {"seed", seed}, {"format", format}, {"grid", grid}, {"suite", suite},
                {"config", config}, {"legacy_init", legacy_init},
                {"emit_plot_data", emit_plot_data}};
  }
};

namespace detail {

/// Explicit (alpha, beta, eta) when --alpha is given; otherwise the tuned
/// parameters of --method for --epsilon and --K.
inline MethodParams resolve_params(const RunConfig& rc, const QuadraticProblem& p) {
  const Method m = parse_method(rc.method);
  if (!rc.alpha) {
    if (m == Method::generic)
      throw ValidationError("alpha", "required unless --method is sgd, shb or asg");
    if (!rc.epsilon) throw ValidationError("epsilon", "required to derive tuned parameters");
    if (!rc.K) throw ValidationError("K", "required to derive tuned parameters");
    return table1_params(m, p, *rc.epsilon, *rc.K);
  }
  const double beta = rc.beta.value_or(m == Method::asg ? 1.0 : 0.0);
  double eta = 0.0;
  if (rc.eta) eta = *rc.eta;
  else if (m != Method::sgd) throw ValidationError("eta", "required with an explicit --alpha");
  if (m == Method::sgd && eta != 0.0) throw ValidationError("eta", "sgd requires eta = 0");
  if (m == Method::shb && beta != 0.0) throw ValidationError("beta", "shb requires beta = 0");
  if (m == Method::asg && beta != 1.0) throw ValidationError("beta", "asg requires beta = 1");
  return make_params(*rc.alpha, beta, eta, m);
}

/// Noise from the problem file, else isotropic with sigma^2 = K/d, else none.
inline NoiseModel resolve_noise(const RunConfig& rc, const ProblemSpec& ps) {
  if (ps.noise) return *ps.noise;
  const auto d = ps.problem.dim();
  return NoiseModel::isotropic(d, rc.K ? *rc.K / static_cast<double>(d) : 0.0, rc.seed);
}

inline ProblemSpec require_problem(const RunConfig& rc) {
  if (rc.problem.empty()) throw ValidationError("problem", "--problem is required");
  return parse_problem_spec(load_json(rc.problem, "problem"));
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ValidationError("out", "cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline void emit_series(const RunConfig& rc, const MseSeries& s, const Json& prov,
                        std::ostream& stdout_) {
  Output out(rc.out, stdout_);
  if (rc.emit_plot_data) write_series_long_csv(out.get(), s, prov);
  else if (rc.format == "json") out.get() << series_json(s, prov).dump(2) << '\n';
  else write_series_csv(out.get(), s, prov);
}

inline Json problem_json(const ProblemSpec& ps) { return ps.source; }

inline int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec ps = require_problem(rc);
  const MethodParams mp = resolve_params(rc, ps.problem);
  const NoiseModel noise = resolve_noise(rc, ps);
  const MseSeries s =
      simulate_mse(ps.problem, mp, noise, ps.initial_point(), rc.n, rc.trials, rc.seed, rc.init());
  Json prov = provenance("simulate", rc.echo(), rc.seed);
  prov["config"]["problem_spec"] = problem_json(ps);
  prov["config"]["params"] = params_json(mp);
  emit_series(rc, s, prov, out);
  return kExitOk;
}

inline int cmd_oracle(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec ps = require_problem(rc);
  const MethodParams mp = resolve_params(rc, ps.problem);
  const NoiseModel noise = resolve_noise(rc, ps);
  const MseSeries s =
      exact_moment_recursion(ps.problem, mp, noise, ps.initial_point(), rc.n, rc.init());
  Json prov = provenance("oracle", rc.echo(), rc.seed);
  prov["config"]["problem_spec"] = problem_json(ps);
  prov["config"]["params"] = params_json(mp);
  emit_series(rc, s, prov, out);
  return kExitOk;
}

inline int cmd_spectral(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec ps = require_problem(rc);
  const QuadraticProblem& p = ps.problem;
  const MethodParams mp = resolve_params(rc, p);
  const CompanionSystem sys = companion_matrix(p, mp);
  Json eig = Json::array();
  for (const auto& e : sys.eigen)
    eig.push_back({{"lambda", e.lambda}, {"mu_plus", complex_json(e.mu_plus)},
                   {"mu_minus", complex_json(e.mu_minus)}, {"delta", e.delta},
                   {"branch", std::string(to_string(e.branch))}});
  Json interval = nullptr;
  if (mp.beta == 0.0 || mp.beta == 1.0) {
    try {
      const EtaInterval iv = eta_stability_interval(p, mp.alpha, mp.beta);
      interval = {{"lower", iv.lower}, {"upper", iv.upper}, {"empty", iv.empty()},
                  {"contains_eta", iv.contains(mp.eta)}};
    } catch (const DomainError& e) {
      interval = {{"error", e.what()}};
    }
  }
  Json c_hat = nullptr;
  const double al = mp.alpha * p.lambda_min();
  if (al > 0.0 && al <= 1.0) c_hat = c_hat_bound(mp.alpha, p.lambda_min(), p.table_constant());
  Json report{{"provenance", provenance("spectral", rc.echo(), rc.seed)},
              {"params", params_json(mp)},
              {"eigenvalues", eig},
              {"rho_P", sys.rho_P},
              {"rho_P_dense", dense_spectral_radius(sys.P)},
              {"C", p.table_constant()},
              {"C_lemma4", p.diagonalizer_constant()},
              {"C_hat_bound", c_hat},
              {"eta_interval", interval}};
  report["provenance"]["config"]["problem_spec"] = problem_json(ps);
  Output o(rc.out, out);
  o.get() << report.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_bounds(const RunConfig& rc, std::ostream& out) {
  const ProblemSpec ps = require_problem(rc);
  const Method m = parse_method(rc.method);
  if (m == Method::generic) throw ValidationError("method", "must be sgd, shb or asg");
  if (!rc.epsilon) throw ValidationError("epsilon", "is required");
  if (!rc.K) throw ValidationError("K", "is required");
  std::optional<MethodParams> explicit_params;
  if (rc.alpha) explicit_params = resolve_params(rc, ps.problem);
  const double Lambda = ps.problem.error(ps.initial_point()).squaredNorm();
  const BoundReport r =
      make_bound_report(m, ps.problem, *rc.epsilon, *rc.K, Lambda, explicit_params);
  Json report = bound_report_json(r);
  report["provenance"] = provenance("bounds", rc.echo(), rc.seed);
  report["provenance"]["config"]["problem_spec"] = problem_json(ps);
  Output o(rc.out, out);
  o.get() << report.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_verify(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const GridResolution g = parse_grid(rc.grid);
  std::vector<std::string> names;
  if (rc.suite == "all") names = suite_names();
  else names = {rc.suite};
  for (const auto& n : names) {
    const auto& all = suite_names();
    if (std::find(all.begin(), all.end(), n) == all.end())
      throw ValidationError("suite", "unknown suite '" + n + "'");
  }
  std::vector<SuiteReport> reports;
  for (const auto& n : names) reports.push_back(run_suite(n, g));
  {
    Output o(rc.out, out);
    write_margins_csv(o.get(), reports, provenance("verify", rc.echo(), rc.seed));
  }
  int code = kExitOk;
  for (const auto& rep : reports) {
    if (rep.passed()) continue;
    code = kExitVerifyFailed;
    err << "verification failed: " << describe_row(rep.suite, *rep.worst()) << '\n';
  }
  return code;
}

inline int cmd_sweep(const RunConfig& rc, std::ostream& out) {
  if (rc.config.empty()) throw ValidationError("config", "--config is required");
  const Json j = load_json(rc.config, "config");
  const SweepConfig cfg = parse_sweep_config(j);
  const auto rows = run_sweep(cfg);
  Output o(rc.out, out);
  write_sweep_csv(o.get(), rows, provenance("sweep", j, cfg.seed));
  return kExitOk;
}

}  // namespace detail

/// Parses argv and runs one subcommand. Diagnostics go to `err` as a single
/// line naming the offending field.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  RunConfig rc;
  CLI::App app{"Momentum methods for linear stochastic approximation", "lsam"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", rc.problem, "problem JSON file or inline JSON");
    sub->add_option("--method", rc.method, "sgd | shb | asg | generic")
        ->check(CLI::IsMember({"sgd", "shb", "asg", "generic"}));
    sub->add_option("--alpha", rc.alpha, "step size");
    sub->add_option("--beta", rc.beta, "Nesterov mixing in [0, 1]");
    sub->add_option("--eta", rc.eta, "momentum in [0, 1]");
    sub->add_option("--epsilon", rc.epsilon, "target accuracy");
    sub->add_option("--K", rc.K, "noise level");
    sub->add_option("--seed", rc.seed, "random seed");
    sub->add_option("--out", rc.out, "output path (default stdout)");
    sub->add_flag("--legacy-init", rc.legacy_init, "start with x_{-1} = x*");
  };
  auto add_series = [&](CLI::App* sub) {
    sub->add_option("--n", rc.n, "number of steps")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", rc.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--emit-plot-data", rc.emit_plot_data, "long-format CSV for plotting");
  };

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo MSE series");
  add_common(simulate);
  add_series(simulate);
  simulate->add_option("--trials", rc.trials, "independent trajectories");
  auto* oracle = app.add_subcommand("oracle", "exact MSE series from the moment recursion");
  add_common(oracle);
  add_series(oracle);
  auto* spectral = app.add_subcommand("spectral", "companion-matrix spectral report (JSON)");
  add_common(spectral);
  auto* bounds = app.add_subcommand("bounds", "sample-complexity bounds report (JSON)");
  add_common(bounds);
  auto* verify = app.add_subcommand("verify", "run verification suites, write margins CSV");
  verify->add_option("--suite", rc.suite, "suite name or all");
  verify->add_option("--grid", rc.grid, "coarse | fine | grid JSON path");
  verify->add_option("--out", rc.out, "output path (default stdout)");
  verify->add_option("--seed", rc.seed, "recorded in the provenance header");
  auto* sweep = app.add_subcommand("sweep", "sample-complexity sweep, write CSV");
  sweep->add_option("--config", rc.config, "sweep JSON file")->required();
  sweep->add_option("--out", rc.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    rc.subcommand = app.get_subcommands().front()->get_name();
    if (rc.subcommand == "simulate") return detail::cmd_simulate(rc, out);
    if (rc.subcommand == "oracle") return detail::cmd_oracle(rc, out);
    if (rc.subcommand == "spectral") return detail::cmd_spectral(rc, out);
    if (rc.subcommand == "bounds") return detail::cmd_bounds(rc, out);
    if (rc.subcommand == "verify") return detail::cmd_verify(rc, out, err);
    return detail::cmd_sweep(rc, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DivergenceError& e) {
    err << "error: diverged at n = " << e.first_step() << ": " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Json::exception& e) {
    err << "error: json: " << e.what() << '\n';
  }
  return kExitInvalid;
}

}  // namespace lsam
