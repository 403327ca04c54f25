#pragma once

// Trajectories of the momentum iterate, Monte Carlo estimates of the mean
// squared error and the exact second-moment recursion used as the oracle.

#include "lsam/core.hpp"
#include "lsam/parallel.hpp"
#include "lsam/problem.hpp"
#include "lsam/rng.hpp"
#include "lsam/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace lsam {

struct TrajectoryState {
  Vector x_curr;
  Vector x_prev;
  std::int64_t step_index = 0;
};

inline TrajectoryState initial_state(const QuadraticProblem& problem, const Vector& x0,
                                     InitConvention init = InitConvention::zero_velocity) {
  if (x0.size() != problem.dim())
    throw ValidationError("x0", "dimension " + std::to_string(x0.size()) +
                                    " does not match d = " + std::to_string(problem.dim()));
  return {x0, init == InitConvention::legacy ? problem.x_star : x0, 0};
}

/// x_{n+1} = x_n + a (b - A x_n + M_{n+1}) + eta (I - a beta A)(x_n - x_{n-1}).
inline TrajectoryState step(const TrajectoryState& state, const QuadraticProblem& problem,
                            const MethodParams& params, const Vector& noise_draw) {
  const Vector velocity = state.x_curr - state.x_prev;
  Vector next = state.x_curr +
                params.alpha * (problem.b - problem.A * state.x_curr + noise_draw) +
                params.eta * (velocity - params.alpha * params.beta * (problem.A * velocity));
  return {std::move(next), state.x_curr, state.step_index + 1};
}

/// Same update written around the look-ahead point x_n + eta beta (x_n - x_{n-1}):
/// x_{n+1} = x_n + a (b - A (look-ahead) + M_{n+1}) + eta (x_n - x_{n-1}).
inline TrajectoryState step_lookahead(const TrajectoryState& state,
                                      const QuadraticProblem& problem,
                                      const MethodParams& params, const Vector& noise_draw) {
  const Vector velocity = state.x_curr - state.x_prev;
  const Vector ahead = state.x_curr + params.eta * params.beta * velocity;
  Vector next = state.x_curr + params.alpha * (problem.b - problem.A * ahead + noise_draw) +
                params.eta * velocity;
  return {std::move(next), state.x_curr, state.step_index + 1};
}

// ---------------------------------------------------------------------------

enum class SeriesSource { monte_carlo, exact_oracle };

inline std::string_view to_string(SeriesSource s) {
  return s == SeriesSource::monte_carlo ? "monte_carlo" : "exact_oracle";
}

struct MsePoint {
  std::int64_t n = 0;
  double mse = 0.0;
  double stderr_ = 0.0;
};

/// E|x_n - x*|^2 over n = 0..horizon. The oracle additionally carries the
/// bias |E x_n - x*|^2, the variance part, and the stacked error
/// E|x_n - x*|^2 + E|x_{n-1} - x*|^2.
struct MseSeries {
  std::vector<MsePoint> values;
  SeriesSource source = SeriesSource::exact_oracle;
  std::vector<double> bias;
  std::vector<double> variance;
  std::vector<double> stacked;

  std::int64_t horizon() const { return values.empty() ? -1 : values.back().n; }
  double mse(std::int64_t n) const { return values.at(static_cast<std::size_t>(n)).mse; }
};

namespace detail {

struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }

  static RunningMoments merge(const RunningMoments& a, const RunningMoments& b) {
    if (a.count == 0.0) return b;
    if (b.count == 0.0) return a;
    RunningMoments out;
    out.count = a.count + b.count;
    const double d = b.mean - a.mean;
    out.mean = a.mean + d * b.count / out.count;
    out.m2 = a.m2 + b.m2 + d * d * a.count * b.count / out.count;
    return out;
  }
};

inline constexpr std::int64_t kTrialsPerChunk = 256;

}  // namespace detail

/// Monte Carlo estimate of E|x_n - x*|^2 for n = 0..n_steps. Trial t draws
/// from the stream (seed, t); chunks of trials are merged in a fixed tree, so
/// the output is bit-identical for any thread count.
inline MseSeries simulate_mse(const QuadraticProblem& problem, const MethodParams& params,
                              const NoiseModel& noise, const Vector& x0,
                              std::int64_t n_steps, std::int64_t trials, std::uint64_t seed,
                              InitConvention init = InitConvention::zero_velocity) {
  params.validate();
  if (trials < 1) throw ValidationError("trials", "must be >= 1");
  if (n_steps < 1) throw ValidationError("n", "must be >= 1");
  if (noise.dim != problem.dim())
    throw ValidationError("noise", "dimension does not match the problem");
  const TrajectoryState start = initial_state(problem, x0, init);

  const std::int64_t chunks = (trials + detail::kTrialsPerChunk - 1) / detail::kTrialsPerChunk;
  const auto horizon = static_cast<std::size_t>(n_steps + 1);
  std::vector<std::vector<detail::RunningMoments>> partial(static_cast<std::size_t>(chunks));
  std::vector<std::int64_t> diverged(static_cast<std::size_t>(chunks),
                                     std::numeric_limits<std::int64_t>::max());

  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    auto& acc = partial[c];
    acc.assign(horizon, {});
    const std::int64_t first = static_cast<std::int64_t>(c) * detail::kTrialsPerChunk;
    const std::int64_t last = std::min(trials, first + detail::kTrialsPerChunk);
    for (std::int64_t t = first; t < last; ++t) {
      CounterRng rng(seed, streams::kTrialBase + static_cast<std::uint64_t>(t));
      TrajectoryState s = start;
      Vector err = problem.error(s.x_curr);
      acc[0].push(err.squaredNorm());
      for (std::int64_t n = 1; n <= n_steps; ++n) {
        s = step(s, problem, params, noise_sample(noise, err, rng));
        err = problem.error(s.x_curr);
        const double e2 = err.squaredNorm();
        if (!(e2 <= kDivergenceThreshold)) {
          diverged[c] = std::min(diverged[c], n);
          break;
        }
        acc[static_cast<std::size_t>(n)].push(e2);
      }
    }
  });

  const std::int64_t first_divergent = *std::min_element(diverged.begin(), diverged.end());
  if (first_divergent != std::numeric_limits<std::int64_t>::max())
    throw DivergenceError(first_divergent);

  MseSeries out;
  out.source = SeriesSource::monte_carlo;
  out.values.resize(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    std::vector<detail::RunningMoments> items;
    items.reserve(partial.size());
    for (const auto& p : partial) items.push_back(p[n]);
    const auto m = pairwise_reduce(std::move(items), detail::RunningMoments::merge);
    const double sd = m.count > 1.0 ? std::sqrt(m.m2 / (m.count - 1.0)) : 0.0;
    out.values[n] = {static_cast<std::int64_t>(n), m.mean, sd / std::sqrt(m.count)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact second moments

/// Streaming form of M_n = P M_{n-1} P^T + a^2 embed(Q), M_0 = X_0 X_0^T,
/// tracked together with the mean E X_n = P^n X_0.
///
/// Symmetric problems run in modal coordinates y = S^T x~, where P splits
/// into d independent 2x2 blocks; the per-coordinate traces are invariant
/// under the orthogonal change of basis, so only the diagonal blocks are
/// needed. Everything else runs on the dense 2d x 2d matrices.
class MomentRecursion {
 public:
  enum class Mode { automatic, dense, modal };

  MomentRecursion(const QuadraticProblem& problem, const MethodParams& params,
                  const Matrix& noise_cov, const Vector& x0,
                  InitConvention init = InitConvention::zero_velocity,
                  Mode mode = Mode::automatic)
      : alpha2_(params.alpha * params.alpha) {
    params.validate();
    const Eigen::Index d = problem.dim();
    if (noise_cov.rows() != d || noise_cov.cols() != d)
      throw ValidationError("noise_cov", "must be d x d");
    const TrajectoryState s0 = initial_state(problem, x0, init);
    const Vector e0 = problem.error(s0.x_curr);
    const Vector e1 = problem.error(s0.x_prev);
    modal_ = mode == Mode::modal || (mode == Mode::automatic && problem.is_symmetric);
    if (modal_ && !problem.is_symmetric)
      throw UnsupportedError("modal recursion needs an orthogonal diagonalizer");
    if (modal_) {
      const Matrix& S = problem.S;
      const Vector y0 = S.transpose() * e0;
      const Vector y1 = S.transpose() * e1;
      const Vector q = (S.transpose() * noise_cov * S).diagonal();
      blocks_.resize(static_cast<std::size_t>(d));
      for (Eigen::Index i = 0; i < d; ++i) {
        const double eta_r = params.reduced_eta(problem.eigenvalues(i));
        auto& b = blocks_[static_cast<std::size_t>(i)];
        b.c = 1.0 - params.alpha * problem.eigenvalues(i) + eta_r;
        b.e = eta_r;
        b.q = q(i);
        b.m00 = y0(i) * y0(i);
        b.m01 = y0(i) * y1(i);
        b.m11 = y1(i) * y1(i);
        b.u0 = y0(i);
        b.u1 = y1(i);
      }
    } else {
      P_ = transition_matrix(problem.A, params);
      Q_ = Matrix::Zero(2 * d, 2 * d);
      Q_.topLeftCorner(d, d) = 0.5 * (noise_cov + noise_cov.transpose());
      mean_.resize(2 * d);
      mean_ << e0, e1;
      M_ = mean_ * mean_.transpose();
    }
    d_ = d;
  }

  void advance() {
    if (modal_) {
      for (auto& b : blocks_) {
        const double n00 = b.c * b.c * b.m00 - 2.0 * b.c * b.e * b.m01 +
                           b.e * b.e * b.m11 + alpha2_ * b.q;
        const double n01 = b.c * b.m00 - b.e * b.m01;
        b.m11 = b.m00;
        b.m01 = n01;
        b.m00 = n00;
        const double u = b.c * b.u0 - b.e * b.u1;
        b.u1 = b.u0;
        b.u0 = u;
      }
    } else {
      M_ = P_ * M_ * P_.transpose() + alpha2_ * Q_;
      M_ = 0.5 * (M_ + M_.transpose());
      mean_ = P_ * mean_;
    }
    ++n_;
  }

  std::int64_t step_index() const { return n_; }

  /// E|x_n - x*|^2
  double mse() const {
    if (!modal_) return M_.topLeftCorner(d_, d_).trace();
    double s = 0.0;
    for (const auto& b : blocks_) s += b.m00;
    return s;
  }

  /// E|X_n|^2 of the stacked state.
  double stacked_mse() const {
    if (!modal_) return M_.trace();
    double s = 0.0;
    for (const auto& b : blocks_) s += b.m00 + b.m11;
    return s;
  }

  /// |E x_n - x*|^2
  double bias() const {
    if (!modal_) return mean_.head(d_).squaredNorm();
    double s = 0.0;
    for (const auto& b : blocks_) s += b.u0 * b.u0;
    return s;
  }

  bool modal() const { return modal_; }

  /// Dense second moment (dense mode only).
  const Matrix& second_moment() const {
    if (modal_) throw UnsupportedError("second moment matrix is not tracked in modal mode");
    return M_;
  }
  const Vector& mean() const {
    if (modal_) throw UnsupportedError("mean vector is not tracked in modal mode");
    return mean_;
  }

 private:
  struct Block {
    double c = 0.0, e = 0.0, q = 0.0;
    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    double u0 = 0.0, u1 = 0.0;
  };

  double alpha2_;
  Eigen::Index d_ = 0;
  std::int64_t n_ = 0;
  bool modal_ = false;
  std::vector<Block> blocks_;
  Matrix P_, Q_, M_;
  Vector mean_;
};

/// Exact MSE series for state-independent noise with covariance noise_cov.
inline MseSeries exact_moment_recursion(const QuadraticProblem& problem,
                                        const MethodParams& params, const Matrix& noise_cov,
                                        const Vector& x0, std::int64_t n_steps,
                                        InitConvention init = InitConvention::zero_velocity,
                                        MomentRecursion::Mode mode = MomentRecursion::Mode::automatic) {
  if (n_steps < 0) throw ValidationError("n", "must be >= 0");
  MomentRecursion rec(problem, params, noise_cov, x0, init, mode);
  MseSeries out;
  out.source = SeriesSource::exact_oracle;
  const auto count = static_cast<std::size_t>(n_steps + 1);
  out.values.reserve(count);
  out.bias.reserve(count);
  out.variance.reserve(count);
  out.stacked.reserve(count);
  for (std::int64_t n = 0; n <= n_steps; ++n) {
    if (n > 0) rec.advance();
    const double m = rec.mse();
    const double b = rec.bias();
    out.values.push_back({n, m, 0.0});
    out.bias.push_back(b);
    out.variance.push_back(std::max(0.0, m - b));
    out.stacked.push_back(rec.stacked_mse());
  }
  return out;
}

inline MseSeries exact_moment_recursion(const QuadraticProblem& problem,
                                        const MethodParams& params, const NoiseModel& noise,
                                        const Vector& x0, std::int64_t n_steps,
                                        InitConvention init = InitConvention::zero_velocity) {
  if (!noise.state_independent())
    throw UnsupportedError(
        "the exact oracle needs state-independent noise; use simulate_mse");
  return exact_moment_recursion(problem, params, noise.covariance(), x0, n_steps, init);
}

struct BiasVariance {
  double bias = 0.0;
  double variance_lb = 0.0;
};

/// Univariate split |P^n X_0|^2 + a^2 K sum_{j<n} |P^j e_1|^2 of the stacked
/// error, both terms by direct matrix powering.
inline BiasVariance bias_variance_decomposition(const QuadraticProblem& problem,
                                                const MethodParams& params, double K,
                                                const Vector& x0, std::int64_t n,
                                                InitConvention init = InitConvention::zero_velocity) {
  if (problem.dim() != 1)
    throw UnsupportedError("bias/variance decomposition is defined for d = 1");
  if (n < 1) throw ValidationError("n", "must be >= 1");
  params.validate();
  const Matrix P = transition_matrix(problem.A, params);
  const TrajectoryState s0 = initial_state(problem, x0, init);
  Eigen::Vector2d X0(problem.error(s0.x_curr)(0), problem.error(s0.x_prev)(0));
  Eigen::Vector2d e1(1.0, 0.0);
  Eigen::Matrix2d Pj = Eigen::Matrix2d::Identity();
  double sum = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    sum += (Pj * e1).squaredNorm();
    Pj = Pj * P;
  }
  return {(Pj * X0).squaredNorm(), params.alpha * params.alpha * K * sum};
}

struct StationaryCovariance {
  Matrix covariance;
  double trace_mse = 0.0;
};

/// Fixed point Sigma = P Sigma P^T + a^2 embed(Q). Direct Kronecker solve
/// when 2d <= 16, Smith doubling otherwise.
inline StationaryCovariance stationary_covariance(const QuadraticProblem& problem,
                                                  const MethodParams& params,
                                                  const Matrix& noise_cov) {
  params.validate();
  const Eigen::Index d = problem.dim();
  const Matrix P = transition_matrix(problem.A, params);
  if (dense_spectral_radius(P) >= 1.0)
    throw DomainError("spectral radius >= 1: no stationary distribution");
  const Eigen::Index m = 2 * d;
  Matrix Q = Matrix::Zero(m, m);
  Q.topLeftCorner(d, d) = params.alpha * params.alpha * noise_cov;
  Matrix sigma;
  if (m <= 16) {
    // (I - P kron P) vec(Sigma) = vec(Q), column-major vec.
    Matrix K = Matrix::Identity(m * m, m * m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        K.block(i * m, j * m, m, m) -= P(i, j) * P;
    const Vector vq = Eigen::Map<const Vector>(Q.data(), m * m);
    const Vector vs = K.partialPivLu().solve(vq);
    sigma = Eigen::Map<const Matrix>(vs.data(), m, m);
  } else {
    sigma = Q;
    Matrix Pk = P;
    for (int it = 0; it < 200; ++it) {
      const Matrix inc = Pk * sigma * Pk.transpose();
      sigma += inc;
      Pk = Pk * Pk;
      if (inc.norm() <= 1e-12 * sigma.norm()) break;
    }
  }
  sigma = 0.5 * (sigma + sigma.transpose());
  return {sigma, sigma.topLeftCorner(d, d).trace()};
}

}  // namespace lsam
