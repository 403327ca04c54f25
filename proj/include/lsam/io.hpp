#pragma once

// JSON configuration parsing and CSV/JSON emission. Every output starts with
// a provenance header; numbers use the shortest round-trip representation so
// reruns are byte-identical and re-parsing is lossless.

#include "lsam/complexity.hpp"
#include "lsam/core.hpp"
#include "lsam/dynamics.hpp"
#include "lsam/problem.hpp"
#include "lsam/spectral.hpp"
#include "lsam/theory.hpp"
#include "lsam/verify.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lsam {

using Json = nlohmann::json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Empty cell for NaN, otherwise the shortest round-trip form.
inline std::string csv_cell(double v) { return std::isnan(v) ? "" : format_double(v); }

/// Reads a JSON document from a file, or parses the argument itself when it
/// starts with '{'.
inline Json load_json(const std::string& path_or_inline, const std::string& field) {
  std::string text;
  const auto first = path_or_inline.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && path_or_inline[first] == '{') {
    text = path_or_inline;
  } else {
    std::ifstream in(path_or_inline);
    if (!in) throw ValidationError(field, "cannot open '" + path_or_inline + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(field, std::string("malformed JSON: ") + e.what());
  }
}

namespace detail {

template <typename T>
T json_get(const Json& j, const char* key, const std::string& ctx, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ValidationError(ctx + "." + key, "has the wrong type");
  }
}

inline Vector json_vector(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field, "must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(field, "must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline std::vector<double> json_list(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  const Vector v = json_vector(j, field);
  return {v.data(), v.data() + v.size()};
}

}  // namespace detail

inline NoiseModel parse_noise(const Json& j, Eigen::Index d) {
  if (!j.is_object()) throw ValidationError("noise", "must be an object");
  const std::string kind =
      detail::json_get<std::string>(j, "kind", "noise", "isotropic_gaussian");
  const auto seed = detail::json_get<std::uint64_t>(j, "seed", "noise", 0);
  if (kind == "isotropic_gaussian")
    return NoiseModel::isotropic(d, detail::json_get<double>(j, "sigma2", "noise", 1.0), seed);
  if (kind == "anisotropic_gaussian") {
    if (!j.contains("variances")) throw ValidationError("noise.variances", "is required");
    const Vector v = detail::json_vector(j.at("variances"), "noise.variances");
    if (v.size() != d)
      throw ValidationError("noise.variances", "dimension " + std::to_string(v.size()) +
                                                   " does not match d = " + std::to_string(d));
    return NoiseModel::anisotropic(v, seed);
  }
  if (kind == "state_scaled_gaussian")
    return NoiseModel::state_scaled(d, detail::json_get<double>(j, "sigma2", "noise", 1.0),
                                    detail::json_get<double>(j, "c", "noise", 0.0), seed);
  throw ValidationError("noise.kind", "unknown kind '" + kind + "'");
}

struct ProblemSpec {
  QuadraticProblem problem;
  std::optional<NoiseModel> noise;
  std::optional<Vector> x0;
  Json source;

  Vector initial_point() const { return x0.value_or(Vector::Zero(problem.dim())); }
};

/// {"eigenvalues": [...], "similarity_condition": 1.0, "seed": 0,
///  "b": [...]?, "x0": [...]?, "noise": {...}?}. A similarity condition of 1
/// selects the symmetric generator.
inline ProblemSpec parse_problem_spec(const Json& j) {
  if (!j.is_object()) throw ValidationError("problem", "must be a JSON object");
  if (!j.contains("eigenvalues")) throw ValidationError("problem.eigenvalues", "is required");
  const Vector eig = detail::json_vector(j.at("eigenvalues"), "problem.eigenvalues");
  const std::vector<double> ev(eig.data(), eig.data() + eig.size());
  const double cond = detail::json_get<double>(j, "similarity_condition", "problem", 1.0);
  const auto seed = detail::json_get<std::uint64_t>(j, "seed", "problem", 0);
  std::optional<Vector> b;
  if (j.contains("b")) b = detail::json_vector(j.at("b"), "problem.b");

  ProblemSpec spec;
  spec.source = j;
  spec.problem = cond == 1.0 ? make_symmetric_problem(ev, seed, b)
                             : make_nonsymmetric_problem(ev, cond, seed, b);
  const auto d = spec.problem.dim();
  if (j.contains("x0")) {
    spec.x0 = detail::json_vector(j.at("x0"), "problem.x0");
    if (spec.x0->size() != d)
      throw ValidationError("problem.x0", "dimension " + std::to_string(spec.x0->size()) +
                                              " does not match d = " + std::to_string(d));
  }
  if (j.contains("noise")) spec.noise = parse_noise(j.at("noise"), d);
  return spec;
}

/// Sweep configuration:
///   {"problem": {...}, "methods": ["sgd", ...], "epsilon": [...], "K": [...],
///    "grid": "table1" | {"alpha": [...], "beta": [...], "eta": [...]},
///    "trials": 10000, "seed": 0, "horizon_multiplier": 4, "max_horizon": ...,
///    "legacy_init": true, "source": "oracle" | "monte_carlo",
///    "noise_normalization": "trace" | "floor"}
inline SweepConfig parse_sweep_config(const Json& j) {
  if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
  if (!j.contains("problem")) throw ValidationError("config.problem", "is required");
  const ProblemSpec ps = parse_problem_spec(j.at("problem"));
  SweepConfig cfg;
  cfg.problem = ps.problem;
  cfg.x0 = ps.x0;
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j.at("methods")) {
      if (!m.is_string()) throw ValidationError("config.methods", "must be strings");
      cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  if (!j.contains("epsilon")) throw ValidationError("config.epsilon", "is required");
  if (!j.contains("K")) throw ValidationError("config.K", "is required");
  cfg.epsilons = detail::json_list(j.at("epsilon"), "config.epsilon");
  cfg.Ks = detail::json_list(j.at("K"), "config.K");
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    if (g.is_string()) {
      if (g.get<std::string>() != "table1")
        throw ValidationError("config.grid", "must be \"table1\" or an object");
    } else if (g.is_object()) {
      cfg.table1 = false;
      for (const char* k : {"alpha", "beta", "eta"})
        if (!g.contains(k)) throw ValidationError(std::string("config.grid.") + k, "is required");
      cfg.alphas = detail::json_list(g.at("alpha"), "config.grid.alpha");
      cfg.betas = detail::json_list(g.at("beta"), "config.grid.beta");
      cfg.etas = detail::json_list(g.at("eta"), "config.grid.eta");
    } else {
      throw ValidationError("config.grid", "must be \"table1\" or an object");
    }
  }
  cfg.trials = detail::json_get<std::int64_t>(j, "trials", "config", cfg.trials);
  cfg.seed = detail::json_get<std::uint64_t>(j, "seed", "config", cfg.seed);
  cfg.horizon_multiplier =
      detail::json_get<double>(j, "horizon_multiplier", "config", cfg.horizon_multiplier);
  cfg.max_horizon = detail::json_get<std::int64_t>(j, "max_horizon", "config", cfg.max_horizon);
  cfg.init = detail::json_get<bool>(j, "legacy_init", "config", true)
                 ? InitConvention::legacy
                 : InitConvention::zero_velocity;
  const auto source = detail::json_get<std::string>(j, "source", "config", "oracle");
  if (source != "oracle" && source != "monte_carlo")
    throw ValidationError("config.source", "must be \"oracle\" or \"monte_carlo\"");
  cfg.monte_carlo = source == "monte_carlo";
  const auto norm = detail::json_get<std::string>(j, "noise_normalization", "config", "trace");
  if (norm != "trace" && norm != "floor")
    throw ValidationError("config.noise_normalization", "must be \"trace\" or \"floor\"");
  cfg.normalization = norm == "trace" ? NoiseNormalization::trace : NoiseNormalization::floor;
  cfg.validate();
  return cfg;
}

/// "coarse", "fine", or a JSON file overriding individual fields of fine.
inline GridResolution parse_grid(const std::string& arg) {
  if (arg == "fine") return GridResolution::fine();
  if (arg == "coarse") return GridResolution::coarse();
  const Json j = load_json(arg, "grid");
  if (!j.is_object()) throw ValidationError("grid", "must be coarse, fine or a JSON object");
  GridResolution g = detail::json_get<std::string>(j, "base", "grid", "fine") == "coarse"
                         ? GridResolution::coarse()
                         : GridResolution::fine();
  g.alpha_lambda_points = detail::json_get<int>(j, "alpha_lambda_points", "grid", g.alpha_lambda_points);
  g.eta_points = detail::json_get<int>(j, "eta_points", "grid", g.eta_points);
  g.theorem1_alpha_points =
      detail::json_get<int>(j, "theorem1_alpha_points", "grid", g.theorem1_alpha_points);
  g.theorem1_eta_points =
      detail::json_get<int>(j, "theorem1_eta_points", "grid", g.theorem1_eta_points);
  g.lemma1_max_terms =
      detail::json_get<std::int64_t>(j, "lemma1_max_terms", "grid", g.lemma1_max_terms);
  g.random_matrices = detail::json_get<int>(j, "random_matrices", "grid", g.random_matrices);
  g.power_horizon = detail::json_get<int>(j, "power_horizon", "grid", g.power_horizon);
  g.mc_trials = detail::json_get<std::int64_t>(j, "mc_trials", "grid", g.mc_trials);
  if (j.contains("theorem1_betas")) g.theorem1_betas = detail::json_list(j.at("theorem1_betas"), "grid.theorem1_betas");
  if (j.contains("theorem2_kappas")) g.theorem2_kappas = detail::json_list(j.at("theorem2_kappas"), "grid.theorem2_kappas");
  if (g.alpha_lambda_points < 1 || g.eta_points < 1 || g.theorem1_alpha_points < 1 ||
      g.theorem1_eta_points < 1 || g.random_matrices < 0 || g.power_horizon < 1 ||
      g.mc_trials < 2 || g.lemma1_max_terms < 1)
    throw ValidationError("grid", "resolution values must be positive");
  return g;
}

// ---------------------------------------------------------------------------
// Emission

inline Json provenance(const std::string& command, const Json& config, std::uint64_t seed) {
  return Json{{"tool", "lsam"}, {"version", std::string(kVersion)}, {"command", command},
              {"seed", seed}, {"config", config}};
}

inline void write_provenance(std::ostream& out, const Json& prov) {
  out << "# " << prov.dump() << '\n';
}

inline Json params_json(const MethodParams& p) {
  return Json{{"method", std::string(to_string(p.method))},
              {"alpha", p.alpha}, {"beta", p.beta}, {"eta", p.eta}};
}

inline Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

/// Wide CSV n,mse,stderr,bias,variance_lb. For oracle series bias is
/// |E x_n - x*|^2 and variance_lb is mse - bias; both are empty for Monte Carlo.
inline void write_series_csv(std::ostream& out, const MseSeries& s, const Json& prov) {
  write_provenance(out, prov);
  out << "n,mse,stderr,bias,variance_lb\n";
  const bool split = !s.bias.empty();
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const auto& v = s.values[i];
    out << v.n << ',' << format_double(v.mse) << ',' << format_double(v.stderr_) << ',';
    if (split) out << format_double(s.bias[i]) << ',' << format_double(s.variance[i]);
    else out << ',';
    out << '\n';
  }
}

/// Long format for external plotting: source,n,quantity,value.
inline void write_series_long_csv(std::ostream& out, const MseSeries& s, const Json& prov) {
  write_provenance(out, prov);
  out << "source,n,quantity,value\n";
  const std::string src(to_string(s.source));
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const auto& v = s.values[i];
    out << src << ',' << v.n << ",mse," << format_double(v.mse) << '\n';
    if (s.source == SeriesSource::monte_carlo)
      out << src << ',' << v.n << ",stderr," << format_double(v.stderr_) << '\n';
    if (!s.bias.empty()) {
      out << src << ',' << v.n << ",bias," << format_double(s.bias[i]) << '\n';
      out << src << ',' << v.n << ",variance_lb," << format_double(s.variance[i]) << '\n';
      out << src << ',' << v.n << ",stacked_mse," << format_double(s.stacked[i]) << '\n';
    }
  }
}

inline Json series_json(const MseSeries& s, const Json& prov) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    Json r{{"n", s.values[i].n}, {"mse", s.values[i].mse}, {"stderr", s.values[i].stderr_}};
    if (!s.bias.empty()) {
      r["bias"] = s.bias[i];
      r["variance_lb"] = s.variance[i];
      r["stacked_mse"] = s.stacked[i];
    }
    rows.push_back(std::move(r));
  }
  return Json{{"provenance", prov}, {"source", std::string(to_string(s.source))},
              {"series", std::move(rows)}};
}

inline const char* kSweepHeader =
    "method,d,lambda_min,lambda_max,alpha,beta,eta,K,epsilon,seed,rho_P,n0_lower,n0_upper,"
    "n0_empirical,censored,margin,eligible";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                            const Json& prov) {
  write_provenance(out, prov);
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    const auto& res = r.result;
    std::string n0;
    if (res.diverged) n0 = "diverged";
    else if (!r.failure.empty()) n0 = "error";
    else if (res.reached) n0 = std::to_string(res.n0);
    double margin = res.reached ? res.margin_at_n0
                                : (std::isfinite(res.min_mse) ? (r.epsilon - res.min_mse) / r.epsilon
                                                              : std::nan(""));
    out << to_string(r.method) << ',' << r.d << ',' << csv_cell(r.lambda_min) << ','
        << csv_cell(r.lambda_max) << ',' << csv_cell(r.params.alpha) << ','
        << csv_cell(r.params.beta) << ',' << csv_cell(r.params.eta) << ',' << csv_cell(r.K)
        << ',' << csv_cell(r.epsilon) << ',' << r.seed << ',' << csv_cell(r.rho_P) << ','
        << csv_cell(r.n0_lower) << ',' << csv_cell(r.n0_upper) << ',' << n0 << ','
        << (res.censored || !r.failure.empty() ? "true" : "false") << ',' << csv_cell(margin)
        << ',' << (r.eligible ? "true" : "false") << '\n';
  }
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline void write_margins_csv(std::ostream& out, const std::vector<SuiteReport>& reports,
                              const Json& prov) {
  write_provenance(out, prov);
  out << "suite,point,quantity,bound,actual,margin,ok,enforced\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows)
      out << rep.suite << ',' << csv_quote(r.point) << ',' << csv_quote(r.quantity) << ','
          << format_double(r.bound) << ',' << format_double(r.actual) << ','
          << format_double(r.margin) << ',' << (r.ok ? "true" : "false") << ','
          << (r.enforced ? "true" : "false") << '\n';
}

inline std::string describe_row(const std::string& suite, const MarginRow& r) {
  return "suite=" + suite + " point=" + r.point + " quantity=" + r.quantity +
         " bound=" + format_double(r.bound) + " actual=" + format_double(r.actual) +
         " margin=" + format_double(r.margin);
}

inline Json bound_report_json(const BoundReport& r) {
  auto opt = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"method", std::string(to_string(r.method))},
              {"params", params_json(r.params)},
              {"epsilon", r.epsilon},
              {"K", r.K},
              {"n0_lower", r.n0_lower ? Json(*r.n0_lower) : Json(nullptr)},
              {"n0_upper", opt(r.n0_upper)},
              {"eligibility", {{"epsilon_small_enough", r.epsilon_small_enough},
                               {"alpha_in_table_range", r.alpha_in_table_range}}},
              {"constants", {{"C", r.C}, {"C_hat", opt(r.C_hat)}, {"Lambda", r.Lambda}}}};
}

}  // namespace lsam
