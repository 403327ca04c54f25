#pragma once

// Closed-form quantities: tuned parameters per method, lower and upper
// sample-complexity horizons, the variance floors behind the lower bound,
// and the asymptotic covariance trace of heavy ball.

#include "lsam/core.hpp"
#include "lsam/problem.hpp"
#include "lsam/spectral.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace lsam {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

inline void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(field, "must be a positive finite real");
}

inline void require_nonnegative(double v, const char* field) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ValidationError(field, "must be a nonnegative finite real");
}

/// x / y with x / 0 = +inf, used for the K-dependent caps when K = 0.
inline double cap(double num, double den) { return den > 0.0 ? num / den : kInfinity; }

}  // namespace detail

/// Tuned (alpha, beta, eta) for SGD, SHB or ASG. C is 1 for symmetric A and
/// sqrt(d) / (sigma_min(S) sigma_min(S^-1)) otherwise.
inline MethodParams table1_params(Method method, const QuadraticProblem& problem,
                                  double epsilon, double K) {
  detail::require_positive(epsilon, "epsilon");
  detail::require_nonnegative(K, "K");
  const double lmin = problem.lambda_min();
  const double lmax = problem.lambda_max();
  const double C2K = std::pow(problem.table_constant(), 2) * K;

  switch (method) {
    case Method::sgd: {
      const double alpha = std::min({lmin / (0.75 * lmin * lmin + C2K),
                                     detail::cap(epsilon * lmin, 4.0 * C2K),
                                     2.0 / (lmax + lmin)});
      return make_params(alpha, 0.0, 0.0, Method::sgd);
    }
    case Method::shb:
    case Method::asg: {
      const double l32 = std::pow(lmin, 1.5);
      const double first = std::pow(l32 / (0.375 * lmin * lmin + 25.0 * C2K), 2);
      const double second = std::pow(detail::cap(epsilon * l32, 200.0 * C2K), 2);
      const double third = method == Method::shb
                               ? std::pow(2.0 / (std::sqrt(lmin) + std::sqrt(lmax)), 2)
                               : 1.0 / lmax;
      const double alpha = std::min({first, second, third});
      const double base = std::pow(1.0 - std::sqrt(alpha * lmin) / 2.0, 2);
      if (method == Method::shb) return make_params(alpha, 0.0, base, Method::shb);
      const double eta = base / (1.0 - alpha * lmin);
      if (!(eta <= 1.0))
        throw DomainError("ASG momentum " + std::to_string(eta) +
                          " exceeds 1 (alpha * lambda_min = " +
                          std::to_string(alpha * lmin) + ")");
      return make_params(alpha, 1.0, eta, Method::asg);
    }
    case Method::generic:
      break;
  }
  throw ValidationError("method", "tuned parameters exist only for sgd, shb and asg");
}

/// Iterations below which no choice of (alpha, beta, eta) reaches epsilon:
/// K / (64 eps lambda_min^2) * ln(Lambda / eps).
inline double lower_bound_n0(double epsilon, double K, double lambda_min, double Lambda) {
  detail::require_positive(epsilon, "epsilon");
  detail::require_nonnegative(K, "K");
  detail::require_positive(lambda_min, "lambda_min");
  if (!(Lambda > epsilon))
    throw DomainError("Lambda <= epsilon: the iterate may start inside the target ball");
  return K / (64.0 * epsilon * lambda_min * lambda_min) * std::log(Lambda / epsilon);
}

/// True when epsilon <= K / (32 lambda_min^2), the regime where the lower
/// bound is asserted.
inline bool epsilon_eligibility(double epsilon, double K, double lambda_min) {
  return epsilon <= K / (32.0 * lambda_min * lambda_min);
}

/// Which closed form applies to a parameter triple.
inline Method classify(const MethodParams& params) {
  if (params.method != Method::generic) return params.method;
  if (params.eta == 0.0) return Method::sgd;
  if (params.beta == 0.0) return Method::shb;
  if (params.beta == 1.0) return Method::asg;
  throw UnsupportedError("no upper-bound horizon for beta outside {0, 1}");
}

/// Horizon after which the tuned method stays within epsilon. Negative log
/// terms are clamped at 0.
inline double upper_bound_n(Method method, const QuadraticProblem& problem,
                            const MethodParams& params, double epsilon, double Lambda) {
  if (!(params.alpha > 0.0)) throw DomainError("alpha must be positive");
  detail::require_positive(epsilon, "epsilon");
  const double C2 = std::pow(problem.table_constant(), 2);
  const double a = params.alpha * problem.lambda_min();
  if (method == Method::generic) method = classify(params);
  if (method == Method::sgd) return std::max(0.0, std::log(2.0 * C2 * Lambda / epsilon) / a);
  const double scale = 4.0 / std::sqrt(a);
  return std::max({0.0, scale * std::log(50.0 * C2 * Lambda / epsilon),
                   scale * std::log(1.0 / a)});
}

/// (1 - mu+^2)(1 - mu-^2); real for conjugate pairs.
inline double one_minus_squares(Complex mu_plus, Complex mu_minus) {
  const Complex prod = (1.0 - mu_plus * mu_plus) * (1.0 - mu_minus * mu_minus);
  if (std::abs(prod.imag()) > 1e-12 * std::max(1.0, std::abs(prod.real())))
    throw DomainError("(1 - mu+^2)(1 - mu-^2) is not real");
  return prod.real();
}

/// h(eta, a) = (1 - mu+^2)(1 - mu-^2)(1 - eta) / a^2 for the beta = 0 block
/// with alpha * lambda = a.
inline double h_function(double eta, double alpha_lambda) {
  detail::require_positive(alpha_lambda, "alpha_lambda");
  const BlockEigen e = block_eigenvalues(1.0, MethodParams{alpha_lambda, 0.0, eta});
  return one_minus_squares(e.mu_plus, e.mu_minus) * (1.0 - eta) /
         (alpha_lambda * alpha_lambda);
}

/// a^2 K / (2 (1 - mu+^2)(1 - mu-^2)(1 - eta)); +inf when the variance does
/// not converge (eta = 1 or a root on or outside the unit circle).
inline double lemma1_variance_floor(double alpha, double eta, double K, Complex mu_plus,
                                    Complex mu_minus) {
  if (eta >= 1.0 || std::max(std::abs(mu_plus), std::abs(mu_minus)) >= 1.0)
    return kInfinity;
  return alpha * alpha * K / (2.0 * one_minus_squares(mu_plus, mu_minus) * (1.0 - eta));
}

inline double lemma2_floor(double K, double lambda, double rho_P) {
  return K * (1.0 - rho_P) / (16.0 * lambda * lambda);
}

inline double lemma3_gap(double epsilon, double K, double lambda) {
  detail::require_positive(K, "K");
  return 16.0 * epsilon * lambda * lambda / K;
}

/// sum_i 2 a (1 + m) / ((1 - m) lambda_i (2 + 2m - a lambda_i)), the trace
/// of the limiting covariance of heavy ball with momentum m.
inline double shb_asymptotic_trace(const Vector& eigenvalues, double alpha, double momentum) {
  detail::require_positive(alpha, "alpha");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ValidationError("momentum", "must lie in [0, 1)");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    const double den = (1.0 - momentum) * l * (2.0 + 2.0 * momentum - alpha * l);
    if (!(den > 0.0))
      throw DomainError("unstable: 2 + 2m - alpha * lambda <= 0 at lambda = " +
                        std::to_string(l));
    sum += 2.0 * alpha * (1.0 + momentum) / den;
  }
  return sum;
}

inline double shb_asymptotic_trace(const QuadraticProblem& problem, double alpha,
                                   double momentum) {
  return shb_asymptotic_trace(problem.eigenvalues, alpha, momentum);
}

inline double sgd_asymptotic_trace(const Vector& eigenvalues, double alpha) {
  return shb_asymptotic_trace(eigenvalues, alpha, 0.0);
}

/// Heavy ball at alpha = 4/(sqrt(mu) + sqrt(L))^2, m = ((sqrt(L) - sqrt(mu)) /
/// (sqrt(L) + sqrt(mu)))^2 against plain SGD at alpha = 2/(mu + L).
inline double trace_ratio(const Vector& eigenvalues) {
  const double mu = eigenvalues.minCoeff();
  const double L = eigenvalues.maxCoeff();
  const double sm = std::sqrt(mu), sL = std::sqrt(L);
  const double alpha_hb = 4.0 / ((sm + sL) * (sm + sL));
  const double m = std::pow((sL - sm) / (sL + sm), 2);
  return shb_asymptotic_trace(eigenvalues, alpha_hb, m) /
         sgd_asymptotic_trace(eigenvalues, 2.0 / (mu + L));
}

// ---------------------------------------------------------------------------

struct BoundReport {
  Method method = Method::generic;
  MethodParams params;
  double epsilon = 0.0;
  double K = 0.0;
  std::optional<double> n0_lower;  // empty when Lambda <= epsilon
  double n0_upper = 0.0;
  bool epsilon_small_enough = false;
  bool alpha_in_table_range = false;
  double C = 1.0;
  double C_hat = 1.0;
  double Lambda = 0.0;
};

/// Both horizons for one method. Parameters default to the tuned ones; any
/// other triple is still evaluated but flagged out of table range.
inline BoundReport make_bound_report(Method method, const QuadraticProblem& problem,
                                     double epsilon, double K, double Lambda,
                                     const std::optional<MethodParams>& params = std::nullopt) {
  BoundReport r;
  r.method = method;
  r.epsilon = epsilon;
  r.K = K;
  r.Lambda = Lambda;
  r.C = problem.table_constant();
  const MethodParams tuned = table1_params(method, problem, epsilon, K);
  r.params = params.value_or(tuned);
  r.params.validate();
  const double tol = 1e-12;
  r.alpha_in_table_range =
      r.params.alpha <= tuned.alpha * (1.0 + tol) && r.params.beta == tuned.beta &&
      std::abs(r.params.eta - tuned.eta) <= tol * std::max(1.0, tuned.eta);
  r.epsilon_small_enough = epsilon_eligibility(epsilon, K, problem.lambda_min());
  if (Lambda > epsilon) r.n0_lower = lower_bound_n0(epsilon, K, problem.lambda_min(), Lambda);
  r.n0_upper = upper_bound_n(method, problem, r.params, epsilon, Lambda);
  r.C_hat = method == Method::sgd
                ? r.C
                : c_hat_bound(r.params.alpha, problem.lambda_min(), r.C);
  return r;
}

}  // namespace lsam
