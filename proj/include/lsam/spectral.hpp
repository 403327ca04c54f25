#pragma once

// Companion (stacked transition) matrix of the momentum iterate, its 2x2
// eigenvalue blocks, stability intervals for the momentum parameter and the
// power-norm growth constants used by the upper bounds.

#include "lsam/core.hpp"
#include "lsam/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace lsam {

inline constexpr double kRepeatedRootTolerance = 1e-12;

enum class Branch { real, complex, repeated };

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::real: return "real";
    case Branch::complex: return "complex";
    case Branch::repeated: return "repeated";
  }
  return "real";
}

/// Roots of mu^2 - trace * mu + det = 0 for one eigenvalue of A.
struct BlockEigen {
  double lambda = 0.0;
  double trace = 0.0;  // mu_plus + mu_minus
  double det = 0.0;    // mu_plus * mu_minus
  Complex mu_plus;
  Complex mu_minus;
  double delta = 0.0;  // trace^2 - 4 det
  Branch branch = Branch::real;

  double radius() const { return std::max(std::abs(mu_plus), std::abs(mu_minus)); }
};

/// Eigenvalues of the 2x2 block [[1 - a l + eta', -eta'], [1, 0]] with
/// eta' = eta (1 - alpha beta lambda). For beta = 0 this is the heavy-ball
/// block; for beta = 1 it is mu^2 + mu(a l (1 + eta) - 1 - eta) + eta(1 - a l).
inline BlockEigen block_eigenvalues(double lambda, const MethodParams& params) {
  BlockEigen e;
  e.lambda = lambda;
  e.det = params.reduced_eta(lambda);
  e.trace = 1.0 - params.alpha * lambda + e.det;
  e.delta = e.trace * e.trace - 4.0 * e.det;
  if (std::abs(e.delta) < kRepeatedRootTolerance) {
    e.branch = Branch::repeated;
    e.mu_plus = e.mu_minus = Complex(0.5 * e.trace, 0.0);
  } else if (e.delta > 0.0) {
    e.branch = Branch::real;
    const double root = std::sqrt(e.delta);
    // Larger-magnitude root first, the other from the product to avoid
    // cancellation.
    const double big = 0.5 * (e.trace + std::copysign(root, e.trace));
    const double small = big != 0.0 ? e.det / big : 0.0;
    e.mu_plus = Complex(std::max(big, small), 0.0);
    e.mu_minus = Complex(std::min(big, small), 0.0);
  } else {
    e.branch = Branch::complex;
    const double im = 0.5 * std::sqrt(-e.delta);
    e.mu_plus = Complex(0.5 * e.trace, im);
    e.mu_minus = Complex(0.5 * e.trace, -im);
  }
  return e;
}

inline Eigen::Matrix2d block_matrix(double lambda, const MethodParams& params) {
  const double eta_r = params.reduced_eta(lambda);
  Eigen::Matrix2d b;
  b << 1.0 - params.alpha * lambda + eta_r, -eta_r, 1.0, 0.0;
  return b;
}

/// u_j, the first coordinate of B^j e_1 (u_{-1} = 0, u_0 = 1). Uses the
/// Jordan-form expression (j + 1) mu^j on the repeated branch.
inline double impulse_response(const BlockEigen& e, long j) {
  if (j < 0) return 0.0;
  if (e.branch == Branch::repeated)
    return static_cast<double>(j + 1) * std::pow(e.mu_plus.real(), static_cast<double>(j));
  const Complex num = std::pow(e.mu_plus, static_cast<double>(j + 1)) -
                      std::pow(e.mu_minus, static_cast<double>(j + 1));
  return (num / (e.mu_plus - e.mu_minus)).real();
}

/// Stacked 2d x 2d transition matrix for any beta:
///   [[I - aA + eta G, -eta G], [I, 0]],  G = I - a beta A.
inline Matrix transition_matrix(const Matrix& A, const MethodParams& params) {
  const Eigen::Index d = A.rows();
  const Matrix I = Matrix::Identity(d, d);
  const Matrix G = I - params.alpha * params.beta * A;
  Matrix P = Matrix::Zero(2 * d, 2 * d);
  P.topLeftCorner(d, d) = I - params.alpha * A + params.eta * G;
  P.topRightCorner(d, d) = -params.eta * G;
  P.bottomLeftCorner(d, d) = I;
  return P;
}

struct CompanionSystem {
  Matrix P;
  std::vector<Eigen::Matrix2d> blocks;
  std::vector<BlockEigen> eigen;
  double rho_P = 0.0;
  MethodParams params;
};

/// Full companion system. Multivariate problems are limited to beta in
/// {0, 1}; general beta is handled for d = 1 (see eta reduction).
inline CompanionSystem companion_matrix(const QuadraticProblem& problem,
                                        const MethodParams& params) {
  params.validate();
  if (problem.dim() > 1 && params.beta != 0.0 && params.beta != 1.0)
    throw UnsupportedError(
        "beta outside {0, 1} is only supported for d = 1; reduce to beta = 0 "
        "with eta' = eta (1 - alpha beta lambda)");
  CompanionSystem sys;
  sys.params = params;
  sys.P = transition_matrix(problem.A, params);
  for (Eigen::Index i = 0; i < problem.dim(); ++i) {
    const double l = problem.eigenvalues(i);
    sys.blocks.push_back(block_matrix(l, params));
    sys.eigen.push_back(block_eigenvalues(l, params));
    sys.rho_P = std::max(sys.rho_P, sys.eigen.back().radius());
  }
  return sys;
}

inline double spectral_radius(const CompanionSystem& system) { return system.rho_P; }

/// Spectral radius from a dense eigensolver; independent of the block
/// formulas.
inline double dense_spectral_radius(const Matrix& M) {
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Stability interval of the momentum parameter

struct EtaInterval {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool empty() const { return lower > upper; }
  bool contains(double eta) const { return eta >= lower && eta <= upper; }
};

/// Momentum values for which every block is in the complex (or repeated)
/// regime, where |mu| no longer depends on lambda_i.
inline EtaInterval eta_stability_interval(const Vector& eigenvalues, double alpha,
                                          double beta) {
  if (!(alpha >= 0.0)) throw ValidationError("alpha", "must be nonnegative");
  if (beta != 0.0 && beta != 1.0)
    throw UnsupportedError("stability interval is defined for beta in {0, 1}");
  const double lmax = eigenvalues.maxCoeff();
  if (beta == 1.0 && alpha * lmax > 1.0)
    throw DomainError("beta = 1 requires alpha <= 1 / lambda_max");
  EtaInterval out;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double al = alpha * eigenvalues(i);
    const double s = std::sqrt(al);
    double lo = (1.0 - s) * (1.0 - s);
    double hi = (1.0 + s) * (1.0 + s);
    if (beta == 1.0) {
      const double shrink = 1.0 - al;
      if (shrink <= 0.0) continue;  // alpha lambda = 1: mu = 0 for any eta
      lo /= shrink;
      hi /= shrink;
    }
    out.lower = std::max(out.lower, lo);
    out.upper = std::min(out.upper, hi);
  }
  return out;
}

inline EtaInterval eta_stability_interval(const QuadraticProblem& problem,
                                          double alpha, double beta) {
  return eta_stability_interval(problem.eigenvalues, alpha, beta);
}

// ---------------------------------------------------------------------------
// Singular values and power-norm constants

inline double sigma_max(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double sigma_min(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Jordan decomposition M = S J S^{-1}. `chain_lengths` lists the Jordan
/// block sizes in column order; largest_block is r.
struct JordanDecomposition {
  ComplexMatrix S;
  ComplexVector eigenvalues;  // diagonal of J, column order
  std::vector<int> chain_lengths;
  int largest_block = 1;

  ComplexMatrix J() const {
    ComplexMatrix j = eigenvalues.asDiagonal();
    Eigen::Index col = 0;
    for (int len : chain_lengths) {
      for (int k = 1; k < len; ++k) j(col + k - 1, col + k) = 1.0;
      col += len;
    }
    return j;
  }
};

namespace detail {

/// Orthonormal basis of the numerical null space.
inline ComplexMatrix null_space(const ComplexMatrix& m, double tol) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv.size() ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol * scale) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

/// Orthonormal basis of range(cand) after projecting out span(w).
inline ComplexMatrix complement_basis(const ComplexMatrix& cand,
                                      const ComplexMatrix& w, double tol) {
  ComplexMatrix proj = cand;
  if (w.cols() > 0) {
    Eigen::JacobiSVD<ComplexMatrix> wsvd(w, Eigen::ComputeThinU);
    const auto& wsv = wsvd.singularValues();
    Eigen::Index wr = 0;
    while (wr < wsv.size() && wsv(wr) > tol * std::max(1.0, wsv(0))) ++wr;
    const ComplexMatrix q = wsvd.matrixU().leftCols(wr);
    proj = cand - q * (q.adjoint() * cand);
  }
  if (proj.cols() == 0) return proj;
  Eigen::JacobiSVD<ComplexMatrix> svd(proj, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index keep = 0;
  while (keep < sv.size() && sv(keep) > tol) ++keep;
  return svd.matrixU().leftCols(keep);
}

/// Jordan chains for one eigenvalue cluster; empty optional when the
/// numerical ranks are inconsistent with the cluster's multiplicity.
inline std::optional<std::pair<ComplexMatrix, std::vector<int>>> jordan_chains(
    const ComplexMatrix& M, Complex center, int multiplicity, double tol) {
  const Eigen::Index n = M.rows();
  const ComplexMatrix N = M - center * ComplexMatrix::Identity(n, n);
  std::vector<ComplexMatrix> kernels{ComplexMatrix(n, 0)};
  ComplexMatrix power = ComplexMatrix::Identity(n, n);
  for (int k = 1; k <= multiplicity; ++k) {
    power = N * power;
    kernels.push_back(null_space(power, tol));
    if (kernels.back().cols() == multiplicity) break;
    if (kernels.back().cols() > multiplicity) return std::nullopt;
  }
  if (kernels.back().cols() != multiplicity) return std::nullopt;
  const int top = static_cast<int>(kernels.size()) - 1;

  std::vector<std::pair<Eigen::VectorXcd, int>> heads;  // (vector, length)
  for (int k = top; k >= 1; --k) {
    ComplexMatrix w = kernels[k - 1];
    for (const auto& [v, len] : heads) {
      Eigen::VectorXcd image = v;
      for (int s = 0; s < len - k; ++s) image = N * image;
      w.conservativeResize(n, w.cols() + 1);
      w.col(w.cols() - 1) = image;
    }
    const ComplexMatrix fresh = complement_basis(kernels[k], w, tol);
    for (Eigen::Index c = 0; c < fresh.cols(); ++c) heads.emplace_back(fresh.col(c), k);
  }
  ComplexMatrix cols(n, 0);
  std::vector<int> lengths;
  for (const auto& [v, len] : heads) {
    std::vector<Eigen::VectorXcd> chain(len);
    chain[len - 1] = v;
    for (int s = len - 2; s >= 0; --s) chain[s] = N * chain[s + 1];
    for (const auto& c : chain) {
      cols.conservativeResize(n, cols.cols() + 1);
      cols.col(cols.cols() - 1) = c;
    }
    lengths.push_back(len);
  }
  if (cols.cols() != multiplicity) return std::nullopt;
  return std::make_pair(cols, lengths);
}

}  // namespace detail

/// Numerical Jordan decomposition. Eigenvalues closer than `cluster_tol`
/// (relative) are grouped and resolved into chains; a cluster whose ranks do
/// not support a Jordan structure falls back to the solver's eigenvectors.
inline JordanDecomposition jordan_decomposition(const Matrix& M,
                                                double cluster_tol = 1e-6,
                                                double rank_tol = 1e-7) {
  const Eigen::Index n = M.rows();
  const ComplexMatrix Mc = M.cast<Complex>();
  Eigen::ComplexEigenSolver<ComplexMatrix> es(Mc);
  const ComplexVector ev = es.eigenvalues();
  const ComplexMatrix vecs = es.eigenvectors();

  std::vector<int> cluster(n, -1);
  int clusters = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = clusters;
    bool grew = true;
    while (grew) {
      grew = false;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (cluster[j] >= 0) continue;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (cluster[k] != clusters) continue;
          if (std::abs(ev(j) - ev(k)) <= cluster_tol * std::max(1.0, std::abs(ev(k)))) {
            cluster[j] = clusters;
            grew = true;
            break;
          }
        }
      }
    }
    ++clusters;
  }

  JordanDecomposition out;
  out.S.resize(n, 0);
  out.eigenvalues.resize(0);
  auto append = [&](const ComplexMatrix& cols, Complex value, const std::vector<int>& lengths) {
    const Eigen::Index start = out.S.cols();
    out.S.conservativeResize(n, start + cols.cols());
    out.S.rightCols(cols.cols()) = cols;
    out.eigenvalues.conservativeResize(start + cols.cols());
    out.eigenvalues.tail(cols.cols()).setConstant(value);
    for (int len : lengths) {
      out.chain_lengths.push_back(len);
      out.largest_block = std::max(out.largest_block, len);
    }
  };
  for (int c = 0; c < clusters; ++c) {
    std::vector<Eigen::Index> members;
    Complex center(0.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
      if (cluster[i] == c) {
        members.push_back(i);
        center += ev(i);
      }
    center /= static_cast<double>(members.size());
    if (members.size() > 1) {
      if (auto chains = detail::jordan_chains(Mc, center,
                                              static_cast<int>(members.size()), rank_tol)) {
        append(chains->first, center, chains->second);
        continue;
      }
    }
    for (Eigen::Index i : members) append(vecs.col(i), ev(i), {1});
  }
  return out;
}

/// Constant C_delta with ||M^n|| <= C_delta (rho(M) + delta)^n:
///   sqrt(d') / (delta^{r-1} sigma_min(S) sigma_min(S^{-1})).
/// delta = 0 requires numerically distinct eigenvalues (gap > 1e-8) and then
/// returns the delta-free constant C.
inline double norm_growth_constant(const Matrix& M, double delta) {
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  const double order = static_cast<double>(M.rows());
  if (delta == 0.0) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(M.cast<Complex>());
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      for (Eigen::Index j = i + 1; j < ev.size(); ++j)
        if (std::abs(ev(i) - ev(j)) <= 1e-8)
          throw DomainError("delta = 0 needs distinct eigenvalues (degenerate spectrum)");
    const ComplexMatrix S = es.eigenvectors();
    return std::sqrt(order) / (sigma_min(S) * sigma_min(ComplexMatrix(S.inverse())));
  }
  const JordanDecomposition jd = jordan_decomposition(M);
  const int r = jd.largest_block;
  const double dscale = delta < 1.0 ? std::pow(delta, r - 1) : std::pow(delta, 1 - r);
  return std::sqrt(order) /
         (dscale * sigma_min(jd.S) * sigma_min(ComplexMatrix(jd.S.inverse())));
}

/// Exact diagonalizer of the companion matrix, V = T E^T blockdiag(X_i), with
/// T = blockdiag(S, S), E the interleaving permutation and
/// X_i = [[mu_i+, mu_i-], [1, 1]]. P = V diag(mu) V^{-1}.
inline ComplexMatrix companion_diagonalizer(const QuadraticProblem& problem,
                                            const CompanionSystem& system) {
  const Eigen::Index d = problem.dim();
  ComplexMatrix X = ComplexMatrix::Zero(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& e = system.eigen[i];
    if (e.branch == Branch::repeated)
      throw DomainError("companion block has a repeated root; not diagonalizable");
    X(2 * i, 2 * i) = e.mu_plus;
    X(2 * i, 2 * i + 1) = e.mu_minus;
    X(2 * i + 1, 2 * i) = 1.0;
    X(2 * i + 1, 2 * i + 1) = 1.0;
  }
  // E^T maps interleaved (x_1, y_1, x_2, y_2, ...) to stacked (x, y).
  ComplexMatrix Et = ComplexMatrix::Zero(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Et(i, 2 * i) = 1.0;
    Et(d + i, 2 * i + 1) = 1.0;
  }
  ComplexMatrix T = ComplexMatrix::Zero(2 * d, 2 * d);
  T.topLeftCorner(d, d) = problem.S.cast<Complex>();
  T.bottomRightCorner(d, d) = problem.S.cast<Complex>();
  return T * Et * X;
}

/// The constant sqrt(2d) / (sigma_min(V) sigma_min(V^{-1})) built from the
/// exact diagonalizer, for which ||P^n|| <= C rho(P)^n.
inline double companion_growth_constant(const QuadraticProblem& problem,
                                        const CompanionSystem& system) {
  const ComplexMatrix V = companion_diagonalizer(problem, system);
  const double order = static_cast<double>(V.rows());
  return std::sqrt(order) / (sigma_min(V) * sigma_min(ComplexMatrix(V.inverse())));
}

/// Upper bound 5 C / sqrt(alpha lambda_min) on the companion growth constant
/// at the table momentum (identical for beta = 0 and beta = 1).
inline double c_hat_bound(double alpha, double lambda_min, double C) {
  const double al = alpha * lambda_min;
  if (!(al > 0.0)) throw DomainError("alpha * lambda_min must be positive");
  return 5.0 * C / std::sqrt(al);
}

/// Certified floor (15/16) alpha lambda_min on |Delta_i| at the table momentum.
inline double discriminant_floor(double alpha, double lambda_min) {
  return 15.0 / 16.0 * alpha * lambda_min;
}

}  // namespace lsam
