#pragma once

// Empirical sample complexity (first n after which the MSE stays within
// epsilon) and the sweeps that compare it against the closed-form horizons.

#include "lsam/core.hpp"
#include "lsam/dynamics.hpp"
#include "lsam/parallel.hpp"
#include "lsam/problem.hpp"
#include "lsam/spectral.hpp"
#include "lsam/theory.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace lsam {

/// Acceptance windows for the sample-complexity comparisons. They absorb
/// the unstated constants of the order statements.
inline constexpr double kOrderAgreementFactor = 8.0;
inline constexpr double kUpperWindowFactor = 2.0;

struct SampleComplexityResult {
  double epsilon = 0.0;
  bool reached = false;
  std::int64_t n0 = -1;  // -1 when not reached
  std::int64_t horizon = 0;
  Method method = Method::generic;
  SeriesSource source = SeriesSource::exact_oracle;
  double margin_at_n0 = std::numeric_limits<double>::quiet_NaN();  // (eps - mse(n0)) / eps
  double min_mse = std::numeric_limits<double>::quiet_NaN();
  bool censored = false;     // the horizon or a missing certificate cut the answer short
  bool diverged = false;
  bool statistical = false;  // Monte Carlo: no tail certificate exists
  bool ambiguous = false;    // Monte Carlo: |mse - eps| < 2 stderr near n0
  double rho_P = std::numeric_limits<double>::quiet_NaN();
  double stationary_trace = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct TailCertificate {
  double rho = 0.0;
  double stationary = std::numeric_limits<double>::quiet_NaN();
  bool certified = false;   // rho < 1 and stationary trace <= eps
  bool impossible = false;  // rho < 1 and stationary trace > eps
};

inline TailCertificate certify_tail(const QuadraticProblem& problem,
                                    const MethodParams& params, const Matrix& noise_cov,
                                    double epsilon) {
  TailCertificate c;
  c.rho = dense_spectral_radius(transition_matrix(problem.A, params));
  if (c.rho >= 1.0) return c;
  c.stationary = stationary_covariance(problem, params, noise_cov).trace_mse;
  c.certified = c.stationary <= epsilon;
  c.impossible = !c.certified;
  return c;
}

/// Tracks the last index with mse > eps while a series streams past.
struct TailScan {
  double epsilon;
  std::int64_t last_above = -1;
  double mse_after_last_above = std::numeric_limits<double>::quiet_NaN();
  double first_mse = std::numeric_limits<double>::quiet_NaN();
  double min_mse = std::numeric_limits<double>::infinity();
  bool prev_above = false;

  void push(std::int64_t n, double mse) {
    if (n == 0) first_mse = mse;
    min_mse = std::min(min_mse, mse);
    if (mse > epsilon) {
      last_above = n;
      prev_above = true;
    } else if (prev_above) {
      mse_after_last_above = mse;
      prev_above = false;
    }
  }

  bool tail_below(std::int64_t horizon) const { return last_above < horizon; }
  std::int64_t n0() const { return last_above + 1; }
  double mse_at_n0() const { return last_above < 0 ? first_mse : mse_after_last_above; }
};

inline void finish_result(SampleComplexityResult& r, const TailScan& scan) {
  r.min_mse = scan.min_mse;
  const bool below = scan.tail_below(r.horizon);
  if (r.source == SeriesSource::monte_carlo) {
    r.statistical = true;
    r.reached = below;
    r.censored = !below;
  } else if (r.diverged || (std::isfinite(r.stationary_trace) && r.stationary_trace > r.epsilon)) {
    r.reached = false;
  } else {
    r.reached = below && r.rho_P < 1.0;
    r.censored = !r.reached;
  }
  if (r.reached) {
    r.n0 = scan.n0();
    r.margin_at_n0 = (r.epsilon - scan.mse_at_n0()) / r.epsilon;
  }
}

}  // namespace detail

/// Smallest n0 with mse(n) <= eps on [n0, horizon]. An oracle series counts
/// as reached only when rho(P) < 1 and the stationary MSE is itself <= eps;
/// otherwise it is censored, or not reached when the stationary MSE exceeds
/// eps. `noise_cov` is only used for oracle series.
inline SampleComplexityResult empirical_sample_complexity(const MseSeries& series,
                                                          double epsilon,
                                                          const QuadraticProblem& problem,
                                                          const MethodParams& params,
                                                          const Matrix& noise_cov) {
  detail::require_positive(epsilon, "epsilon");
  if (series.values.empty()) throw ValidationError("series", "must be nonempty");
  SampleComplexityResult r;
  r.epsilon = epsilon;
  r.method = params.method;
  r.source = series.source;
  r.horizon = series.horizon();
  detail::TailScan scan{epsilon};
  for (const auto& p : series.values) scan.push(p.n, p.mse);

  if (series.source == SeriesSource::exact_oracle) {
    const auto cert = detail::certify_tail(problem, params, noise_cov, epsilon);
    r.rho_P = cert.rho;
    r.stationary_trace = cert.stationary;
  } else {
    r.rho_P = dense_spectral_radius(transition_matrix(problem.A, params));
  }
  detail::finish_result(r, scan);

  if (series.source == SeriesSource::monte_carlo && r.reached) {
    const std::int64_t w = std::max<std::int64_t>(5, r.n0 / 20);
    const std::int64_t lo = std::max<std::int64_t>(0, r.n0 - w);
    const std::int64_t hi = std::min(r.horizon, r.n0 + w);
    for (std::int64_t n = lo; n <= hi; ++n) {
      const auto& p = series.values[static_cast<std::size_t>(n)];
      if (std::abs(p.mse - epsilon) < 2.0 * p.stderr_) r.ambiguous = true;
    }
  }
  return r;
}

/// Oracle scan that streams the moment recursion instead of storing the
/// series, for horizons in the tens of millions.
inline SampleComplexityResult oracle_sample_complexity(
    const QuadraticProblem& problem, const MethodParams& params, const Matrix& noise_cov,
    const Vector& x0, double epsilon, std::int64_t horizon,
    InitConvention init = InitConvention::zero_velocity) {
  detail::require_positive(epsilon, "epsilon");
  if (horizon < 0) throw ValidationError("horizon", "must be >= 0");
  SampleComplexityResult r;
  r.epsilon = epsilon;
  r.method = params.method;
  r.source = SeriesSource::exact_oracle;
  r.horizon = horizon;
  const auto cert = detail::certify_tail(problem, params, noise_cov, epsilon);
  r.rho_P = cert.rho;
  r.stationary_trace = cert.stationary;

  detail::TailScan scan{epsilon};
  MomentRecursion rec(problem, params, noise_cov, x0, init);
  for (std::int64_t n = 0; n <= horizon; ++n) {
    if (n > 0) rec.advance();
    const double m = rec.mse();
    if (!(m <= kDivergenceThreshold)) {
      r.diverged = true;
      scan.push(n, kInfinity);
      break;
    }
    scan.push(n, m);
  }
  detail::finish_result(r, scan);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps

/// How the sweep turns a noise level K into an isotropic covariance:
/// trace gives sigma^2 = K/d (so E|M|^2 = K), floor gives sigma^2 = K
/// (so the covariance is K I).
enum class NoiseNormalization { trace, floor };

struct SweepConfig {
  QuadraticProblem problem;
  std::optional<Vector> x0;  // defaults to the zero vector
  std::vector<Method> methods{Method::sgd, Method::shb, Method::asg};
  std::vector<double> epsilons;
  std::vector<double> Ks;
  bool table1 = true;
  std::vector<double> alphas, betas, etas;  // explicit grid when !table1
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  double horizon_multiplier = 4.0;
  std::int64_t max_horizon = 50'000'000;
  InitConvention init = InitConvention::legacy;
  bool monte_carlo = false;
  NoiseNormalization normalization = NoiseNormalization::trace;

  void validate() const {
    if (epsilons.empty()) throw ValidationError("epsilon", "list must be nonempty");
    if (Ks.empty()) throw ValidationError("K", "list must be nonempty");
    if (table1 && methods.empty()) throw ValidationError("methods", "list must be nonempty");
    if (!table1 && (alphas.empty() || betas.empty() || etas.empty()))
      throw ValidationError("grid", "alpha, beta and eta lists must be nonempty");
    if (!(horizon_multiplier >= 1.0))
      throw ValidationError("horizon_multiplier", "must be >= 1");
    if (trials < 1) throw ValidationError("trials", "must be >= 1");
    for (double e : epsilons) detail::require_positive(e, "epsilon");
    for (double k : Ks) detail::require_nonnegative(k, "K");
  }
};

struct SweepRow {
  Method method = Method::generic;
  Eigen::Index d = 0;
  double lambda_min = 0.0, lambda_max = 0.0;
  MethodParams params;
  double K = 0.0, epsilon = 0.0;
  std::uint64_t seed = 0;
  double rho_P = std::numeric_limits<double>::quiet_NaN();
  double n0_lower = std::numeric_limits<double>::quiet_NaN();
  double n0_upper = std::numeric_limits<double>::quiet_NaN();
  SampleComplexityResult result;
  bool eligible = false;
  std::string failure;  // set when the cell could not be evaluated
};

inline Matrix sweep_noise_covariance(const SweepConfig& cfg, double K) {
  const auto d = cfg.problem.dim();
  const double s2 = cfg.normalization == NoiseNormalization::trace
                        ? K / static_cast<double>(d)
                        : K;
  return Matrix::Identity(d, d) * s2;
}

inline SweepRow run_sweep_cell(const SweepConfig& cfg, Method method, double epsilon,
                               double K, const std::optional<MethodParams>& grid_params) {
  const QuadraticProblem& p = cfg.problem;
  const Vector x0 = cfg.x0.value_or(Vector::Zero(p.dim()));
  SweepRow row;
  row.method = method;
  row.d = p.dim();
  row.lambda_min = p.lambda_min();
  row.lambda_max = p.lambda_max();
  row.K = K;
  row.epsilon = epsilon;
  row.seed = cfg.seed;
  row.eligible = epsilon_eligibility(epsilon, K, p.lambda_min());
  row.result.epsilon = epsilon;
  try {
    row.params = grid_params ? *grid_params : table1_params(method, p, epsilon, K);
    row.params.validate();
    const double Lambda = p.error(x0).squaredNorm();
    if (Lambda > epsilon) row.n0_lower = lower_bound_n0(epsilon, K, p.lambda_min(), Lambda);
    try {
      row.n0_upper = upper_bound_n(method, p, row.params, epsilon, Lambda);
    } catch (const UnsupportedError&) {
      // no closed-form horizon for this beta
    }
    const double predicted = std::max({std::isfinite(row.n0_lower) ? row.n0_lower : 0.0,
                                       std::isfinite(row.n0_upper) ? row.n0_upper : 0.0,
                                       100.0});
    const auto horizon = static_cast<std::int64_t>(std::min<double>(
        std::ceil(cfg.horizon_multiplier * predicted), static_cast<double>(cfg.max_horizon)));
    const Matrix Q = sweep_noise_covariance(cfg, K);
    if (cfg.monte_carlo) {
      const NoiseModel noise =
          NoiseModel::isotropic(p.dim(), Q(0, 0), cfg.seed);
      const MseSeries s =
          simulate_mse(p, row.params, noise, x0, horizon, cfg.trials, cfg.seed, cfg.init);
      row.result = empirical_sample_complexity(s, epsilon, p, row.params, Q);
    } else {
      row.result = oracle_sample_complexity(p, row.params, Q, x0, epsilon, horizon, cfg.init);
    }
    row.result.method = method;
    row.rho_P = row.result.rho_P;
  } catch (const DivergenceError& e) {
    row.result.diverged = true;
    row.failure = e.what();
  } catch (const Error& e) {
    row.failure = e.what();
  }
  return row;
}

/// One row per (method or grid point, epsilon, K), in that nesting order.
/// Cells run in parallel and land in fixed slots, so the table does not
/// depend on the thread count; failing cells are recorded and skipped.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  struct Cell {
    Method method;
    double epsilon, K;
    std::optional<MethodParams> params;
  };
  std::vector<Cell> cells;
  if (cfg.table1) {
    for (Method m : cfg.methods)
      for (double e : cfg.epsilons)
        for (double k : cfg.Ks) cells.push_back({m, e, k, std::nullopt});
  } else {
    for (double a : cfg.alphas)
      for (double b : cfg.betas)
        for (double h : cfg.etas) {
          MethodParams mp{a, b, h, Method::generic};
          Method m = Method::generic;
          try {
            m = classify(mp);
          } catch (const UnsupportedError&) {
          }
          for (double e : cfg.epsilons)
            for (double k : cfg.Ks) cells.push_back({m, e, k, mp});
        }
  }
  std::vector<SweepRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    rows[i] = run_sweep_cell(cfg, cells[i].method, cells[i].epsilon, cells[i].K, cells[i].params);
  });
  return rows;
}

}  // namespace lsam
