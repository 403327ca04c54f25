#pragma once

// Quadratic / linear stochastic approximation problem instances and the
// martingale-difference noise models that drive them.

#include "lsam/core.hpp"
#include "lsam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lsam {

/// Driving matrix A with real positive spectrum, right-hand side b and the
/// fixed point x* = A^{-1} b. S diagonalises A: S^{-1} A S = diag(eigenvalues).
struct QuadraticProblem {
  Matrix A;
  Vector b;
  Vector x_star;
  Vector eigenvalues;  // ascending
  Matrix S;
  double sigma_min_S = 1.0;
  double sigma_min_S_inv = 1.0;
  bool is_symmetric = false;

  Eigen::Index dim() const { return A.rows(); }
  double lambda_min() const { return eigenvalues(0); }
  double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
  double kappa() const { return lambda_max() / lambda_min(); }

  /// sqrt(d) / (sigma_min(S) sigma_min(S^{-1})), the generic power-norm
  /// constant of I - alpha A.
  double diagonalizer_constant() const {
    return std::sqrt(static_cast<double>(dim())) /
           (sigma_min_S * sigma_min_S_inv);
  }

  /// Constant used when evaluating the parameter table: 1 for symmetric A,
  /// the diagonalizer constant otherwise.
  double table_constant() const {
    return is_symmetric ? 1.0 : diagonalizer_constant();
  }

  Vector error(const Vector& x) const { return x - x_star; }
};

namespace detail {

inline double sigma_min(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline void validate_eigenvalues(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty())
    throw ValidationError("eigenvalues", "must be nonempty");
  for (double v : eigenvalues)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError("eigenvalues",
                            "every eigenvalue must be positive and finite");
}

/// Haar-distributed orthogonal matrix from the QR factorisation of a
/// Gaussian matrix, with the sign convention that makes R's diagonal positive.
inline Matrix random_orthogonal(Eigen::Index d, CounterRng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline Vector sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void finish(QuadraticProblem& p, const std::optional<Vector>& b) {
  const Eigen::Index d = p.dim();
  if (b) {
    if (b->size() != d)
      throw ValidationError("b", "dimension " + std::to_string(b->size()) +
                                     " does not match d = " + std::to_string(d));
    p.b = *b;
  } else {
    p.b = p.A * Vector::Ones(d);
  }
  p.x_star = p.A.partialPivLu().solve(p.b);
  p.sigma_min_S = sigma_min(p.S);
  p.sigma_min_S_inv = sigma_min(p.S.inverse());
}

}  // namespace detail

/// A = Q diag(eigenvalues) Q^T with Q a seeded random orthogonal matrix.
/// b defaults to A * 1, so x* is the all-ones vector.
inline QuadraticProblem make_symmetric_problem(
    const std::vector<double>& eigenvalues, std::uint64_t rotation_seed,
    const std::optional<Vector>& b = std::nullopt) {
  detail::validate_eigenvalues(eigenvalues);
  QuadraticProblem p;
  p.eigenvalues = detail::sorted(eigenvalues);
  const auto d = p.eigenvalues.size();
  CounterRng rng(rotation_seed, streams::kRotation);
  p.S = d == 1 ? Matrix::Identity(1, 1) : detail::random_orthogonal(d, rng);
  p.A = p.S * p.eigenvalues.asDiagonal() * p.S.transpose();
  p.A = 0.5 * (p.A + p.A.transpose());
  p.is_symmetric = true;
  detail::finish(p, b);
  return p;
}

/// A = S diag(eigenvalues) S^{-1} where S = Q1 diag(ramp) Q2 has condition
/// number close to `similarity_condition` (geometric singular-value ramp).
inline QuadraticProblem make_nonsymmetric_problem(
    const std::vector<double>& eigenvalues, double similarity_condition,
    std::uint64_t seed, const std::optional<Vector>& b = std::nullopt) {
  detail::validate_eigenvalues(eigenvalues);
  if (!(similarity_condition >= 1.0) || !std::isfinite(similarity_condition))
    throw ValidationError("similarity_condition", "must be a finite real >= 1");
  QuadraticProblem p;
  p.eigenvalues = detail::sorted(eigenvalues);
  const Eigen::Index d = p.eigenvalues.size();
  if (d == 1) {
    p.S = Matrix::Identity(1, 1);
  } else {
    Vector ramp(d);
    for (Eigen::Index k = 0; k < d; ++k)
      ramp(k) = std::pow(similarity_condition,
                         static_cast<double>(k) / static_cast<double>(d - 1));
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 100 && !ok; ++attempt) {
      CounterRng rng(seed, streams::kSimilarity + attempt);
      const Matrix q1 = detail::random_orthogonal(d, rng);
      const Matrix q2 = detail::random_orthogonal(d, rng);
      p.S = q1 * ramp.asDiagonal() * q2;
      Eigen::JacobiSVD<Matrix> svd(p.S);
      const auto& sv = svd.singularValues();
      const double cond = sv(0) / sv(d - 1);
      ok = std::abs(cond - similarity_condition) <= 0.1 * similarity_condition;
    }
    if (!ok)
      throw GenerationError("could not reach similarity condition target " +
                            std::to_string(similarity_condition));
  }
  p.A = p.S * p.eigenvalues.asDiagonal() * p.S.inverse();
  p.is_symmetric = false;
  detail::finish(p, b);
  return p;
}

// ---------------------------------------------------------------------------
// Noise models

enum class NoiseKind { isotropic_gaussian, anisotropic_gaussian, state_scaled_gaussian };

/// Gaussian martingale-difference noise. Conditional covariance:
///   isotropic      sigma2 * I
///   anisotropic    diag(variances)
///   state_scaled   (sigma2 + scale * |x~|^2) * I / d
struct NoiseModel {
  NoiseKind kind = NoiseKind::isotropic_gaussian;
  Eigen::Index dim = 1;
  double sigma2 = 0.0;
  Vector variances;  // anisotropic only
  double scale = 0.0;  // state_scaled only
  std::uint64_t seed = 0;

  static NoiseModel isotropic(Eigen::Index d, double sigma2, std::uint64_t seed = 0) {
    if (!(sigma2 >= 0.0)) throw ValidationError("sigma2", "must be nonnegative");
    if (d < 1) throw ValidationError("dimension", "must be positive");
    return {NoiseKind::isotropic_gaussian, d, sigma2, {}, 0.0, seed};
  }

  static NoiseModel anisotropic(const Vector& variances, std::uint64_t seed = 0) {
    if (variances.size() < 1 || (variances.array() < 0.0).any())
      throw ValidationError("variances", "must be a nonempty nonnegative vector");
    return {NoiseKind::anisotropic_gaussian, variances.size(), 0.0, variances, 0.0, seed};
  }

  static NoiseModel state_scaled(Eigen::Index d, double sigma2, double scale,
                                 std::uint64_t seed = 0) {
    if (!(sigma2 >= 0.0)) throw ValidationError("sigma2", "must be nonnegative");
    if (!(scale >= 0.0)) throw ValidationError("c", "must be nonnegative");
    if (d < 1) throw ValidationError("dimension", "must be positive");
    return {NoiseKind::state_scaled_gaussian, d, sigma2, {}, scale, seed};
  }

  bool state_independent() const { return kind != NoiseKind::state_scaled_gaussian; }

  /// Largest K with E[M M^T | F] >= K I for every state.
  double K_lower() const {
    switch (kind) {
      case NoiseKind::isotropic_gaussian: return sigma2;
      case NoiseKind::anisotropic_gaussian: return variances.minCoeff();
      case NoiseKind::state_scaled_gaussian: return sigma2 / static_cast<double>(dim);
    }
    return 0.0;
  }

  /// Smallest K with E[|M|^2 | F] <= K (1 + |x~|^2).
  double K_upper() const {
    switch (kind) {
      case NoiseKind::isotropic_gaussian: return static_cast<double>(dim) * sigma2;
      case NoiseKind::anisotropic_gaussian: return variances.sum();
      case NoiseKind::state_scaled_gaussian: return std::max(sigma2, scale);
    }
    return 0.0;
  }

  /// Per-coordinate conditional variances at error x_tilde (the covariance is
  /// always diagonal).
  Vector variance_at(const Vector& x_tilde) const {
    switch (kind) {
      case NoiseKind::isotropic_gaussian: return Vector::Constant(dim, sigma2);
      case NoiseKind::anisotropic_gaussian: return variances;
      case NoiseKind::state_scaled_gaussian:
        return Vector::Constant(
            dim, (sigma2 + scale * x_tilde.squaredNorm()) / static_cast<double>(dim));
    }
    return Vector::Zero(dim);
  }

  /// Covariance matrix for state-independent kinds.
  Matrix covariance() const {
    if (!state_independent())
      throw UnsupportedError("state-scaled noise has no state-independent covariance");
    return variance_at(Vector::Zero(dim)).asDiagonal();
  }
};

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::isotropic_gaussian: return "isotropic_gaussian";
    case NoiseKind::anisotropic_gaussian: return "anisotropic_gaussian";
    case NoiseKind::state_scaled_gaussian: return "state_scaled_gaussian";
  }
  return "isotropic_gaussian";
}

/// One conditionally zero-mean draw M_{n+1} given the current error x_tilde.
template <typename Rng>
Vector noise_sample(const NoiseModel& model, const Vector& x_tilde, Rng& rng) {
  std::normal_distribution<double> normal;
  const Vector var = model.variance_at(x_tilde);
  Vector out(model.dim);
  for (Eigen::Index i = 0; i < model.dim; ++i) {
    const double z = normal(rng);
    out(i) = var(i) > 0.0 ? std::sqrt(var(i)) * z : 0.0;
  }
  return out;
}

}  // namespace lsam
