#include "lsam/spectral.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace lsam;

namespace {

QuadraticProblem scalar(double lambda) { return make_symmetric_problem({lambda}, 0); }

Matrix random_matrix(int n, std::uint64_t seed) {
  CounterRng rng(seed, 0x77);
  std::normal_distribution<double> normal;
  Matrix M(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) M(i, j) = normal(rng);
  return M;
}

double max_power_ratio(const Matrix& M, double rate, int horizon) {
  double worst = 0.0;
  Matrix Mn = Matrix::Identity(M.rows(), M.cols());
  for (int n = 1; n <= horizon; ++n) {
    Mn = Mn * M;
    worst = std::max(worst, spectral_norm(Mn) / std::pow(rate, n));
  }
  return worst;
}

}  // namespace

TEST(CompanionMatrix, PlainGradientBlock) {
  const auto sys = companion_matrix(scalar(1.0), make_params(0.5, 0.0, 0.0));
  Matrix want(2, 2);
  want << 0.5, 0.0, 1.0, 0.0;
  EXPECT_LE((sys.P - want).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(spectral_radius(sys), 0.5);
}

TEST(CompanionMatrix, RepeatedRootAtCriticalMomentum) {
  const auto sys = companion_matrix(scalar(1.0), make_params(0.25, 0.0, 0.25));
  ASSERT_EQ(sys.eigen.size(), 1u);
  EXPECT_EQ(sys.eigen[0].branch, Branch::repeated);
  EXPECT_NEAR(sys.eigen[0].mu_plus.real(), 0.5, 1e-15);
  EXPECT_NEAR(sys.rho_P, 0.5, 1e-15);
}

TEST(CompanionMatrix, UnitMomentumOnUnitCircle) {
  const auto sys = companion_matrix(scalar(1.0), make_params(0.25, 0.0, 1.0));
  EXPECT_EQ(sys.eigen[0].branch, Branch::complex);
  EXPECT_NEAR(std::abs(sys.eigen[0].mu_plus), 1.0, 1e-14);
  EXPECT_NEAR(sys.rho_P, 1.0, 1e-14);
}

TEST(CompanionMatrix, BlockLayoutForBothBetas) {
  const auto p = make_nonsymmetric_problem({1.0, 2.0, 4.0}, 3.0, 2);
  const Matrix I = Matrix::Identity(3, 3);
  const double a = 0.1, eta = 0.6;
  const auto shb = companion_matrix(p, make_params(a, 0.0, eta));
  EXPECT_LE((shb.P.topLeftCorner(3, 3) - (I - a * p.A + eta * I)).norm(), 1e-14);
  EXPECT_LE((shb.P.topRightCorner(3, 3) + eta * I).norm(), 1e-14);
  EXPECT_EQ(Matrix(shb.P.bottomLeftCorner(3, 3)), I);
  EXPECT_EQ(Matrix(shb.P.bottomRightCorner(3, 3)), Matrix::Zero(3, 3));
  const auto asg = companion_matrix(p, make_params(a, 1.0, eta));
  const Matrix G = I - a * p.A;
  EXPECT_LE((asg.P.topLeftCorner(3, 3) - (G + eta * G)).norm(), 1e-14);
  EXPECT_LE((asg.P.topRightCorner(3, 3) + eta * G).norm(), 1e-14);
}

TEST(CompanionMatrix, GeneralBetaOnlyForScalars) {
  const auto p = make_symmetric_problem({1.0, 2.0}, 0);
  EXPECT_THROW(companion_matrix(p, make_params(0.1, 0.5, 0.3)), UnsupportedError);
  EXPECT_NO_THROW(companion_matrix(scalar(2.0), make_params(0.1, 0.5, 0.3)));
}

TEST(CompanionMatrix, BlockRadiusMatchesDenseSolver) {
  CounterRng rng(3, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const auto p = make_nonsymmetric_problem({1.0, 3.0, 7.0}, 2.0, static_cast<std::uint64_t>(k));
    const double beta = k % 2 == 0 ? 0.0 : 1.0;
    const auto sys = companion_matrix(p, make_params(u(rng) / 7.0, beta, u(rng)));
    EXPECT_NEAR(sys.rho_P, dense_spectral_radius(sys.P), 1e-9);
  }
}

// ---------------------------------------------------------------------------

TEST(BlockEigenvalues, DoubleRootAtZero) {
  const auto e = block_eigenvalues(2.0, MethodParams{0.5, 0.0, 0.0});
  EXPECT_EQ(std::abs(e.mu_plus), 0.0);
  EXPECT_EQ(std::abs(e.mu_minus), 0.0);
}

TEST(BlockEigenvalues, RootProductEqualsConstantTerm) {
  const auto e = block_eigenvalues(1.0, MethodParams{0.04, 0.0, 0.81});
  // mu^2 + mu (a l - 1 - eta) + eta = 0: evaluate each root and multiply back.
  for (Complex mu : {e.mu_plus, e.mu_minus})
    EXPECT_LE(std::abs(mu * mu + mu * (0.04 - 1.0 - 0.81) + 0.81), 1e-12);
  EXPECT_NEAR((e.mu_plus * e.mu_minus).real(), 0.81, 1e-12);
  EXPECT_NEAR(e.delta, std::pow(1.0 - 0.04 + 0.81, 2) - 4.0 * 0.81, 1e-15);
}

TEST(BlockEigenvalues, NesterovModulus) {
  const auto e = block_eigenvalues(1.0, MethodParams{0.25, 1.0, 1.0});
  EXPECT_NEAR((e.mu_plus * e.mu_minus).real(), 0.75, 1e-12);
  EXPECT_NEAR(std::abs(e.mu_plus), std::sqrt(0.75), 1e-12);
  EXPECT_NEAR(std::abs(e.mu_minus), std::sqrt(0.75), 1e-12);
}

TEST(BlockEigenvalues, RootCoefficientConsistency) {
  CounterRng rng(8, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double lambda = 0.01 + 10.0 * u(rng);
    const double beta = k % 3 == 0 ? 0.0 : (k % 3 == 1 ? 1.0 : u(rng));
    const MethodParams mp{u(rng) / lambda, beta, u(rng)};
    const auto e = block_eigenvalues(lambda, mp);
    // Trace: 1 - a l + eta (1 - a beta l); product: eta (1 - a beta l).
    const double eta_r = mp.eta * (1.0 - mp.alpha * beta * lambda);
    EXPECT_NEAR((e.mu_plus + e.mu_minus).real(), 1.0 - mp.alpha * lambda + eta_r, 1e-12);
    EXPECT_NEAR((e.mu_plus * e.mu_minus).real(), eta_r, 1e-12);
    EXPECT_NEAR((e.mu_plus + e.mu_minus).imag(), 0.0, 1e-12);
  }
}

TEST(BlockEigenvalues, ModulusIndependentOfLambdaInsideInterval) {
  const Vector eig = (Vector(4) << 1.0, 2.0, 5.0, 9.0).finished();
  for (double alpha : {0.01, 0.05, 0.1}) {
    const auto iv = eta_stability_interval(eig, alpha, 0.0);
    ASSERT_FALSE(iv.empty());
    for (int k = 0; k <= 10; ++k) {
      const double eta = iv.lower + (std::min(iv.upper, 1.0) - iv.lower) * k / 10.0;
      for (Eigen::Index i = 0; i < eig.size(); ++i) {
        const auto e = block_eigenvalues(eig(i), MethodParams{alpha, 0.0, eta});
        EXPECT_NEAR(std::abs(e.mu_plus), std::sqrt(eta), 1e-12);
        EXPECT_NEAR(std::abs(e.mu_minus), std::sqrt(eta), 1e-12);
      }
    }
  }
}

TEST(BlockEigenvalues, ImpulseResponseMatchesPowers) {
  for (double eta : {0.0, 0.3, 0.25, 0.9}) {  // 0.25 is the repeated root at a = 0.25
    const MethodParams mp{0.25, 0.0, eta};
    const auto e = block_eigenvalues(1.0, mp);
    const Eigen::Matrix2d B = block_matrix(1.0, mp);
    Eigen::Vector2d v(1.0, 0.0);
    for (long j = 0; j < 60; ++j) {
      EXPECT_NEAR(impulse_response(e, j), v(0), 1e-12);
      v = B * v;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(EtaInterval, HeavyBallScalar) {
  const auto iv = eta_stability_interval(scalar(1.0), 0.25, 0.0);
  EXPECT_NEAR(iv.lower, 0.25, 1e-15);
  EXPECT_NEAR(iv.upper, 2.25, 1e-15);
}

TEST(EtaInterval, NonemptyAtTheStepSizeCap) {
  const Vector eig = (Vector(2) << 1.0, 4.0).finished();
  const double cap = std::pow(2.0 / (1.0 + 2.0), 2);
  const auto iv = eta_stability_interval(eig, cap, 0.0);
  EXPECT_NEAR(iv.lower, 1.0 / 9.0, 1e-14);
  EXPECT_FALSE(iv.empty());
  // The lower endpoint is smallest exactly at the cap.
  for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 1.5})
    EXPECT_GT(eta_stability_interval(eig, cap * f, 0.0).lower, iv.lower) << f;
}

TEST(EtaInterval, NesterovZeroStep) {
  const auto iv = eta_stability_interval(scalar(1.0), 0.0, 1.0);
  EXPECT_DOUBLE_EQ(iv.lower, 1.0);
  EXPECT_DOUBLE_EQ(iv.upper, 1.0);
}

TEST(EtaInterval, Errors) {
  EXPECT_THROW(eta_stability_interval(scalar(2.0), 0.6, 1.0), DomainError);
  EXPECT_THROW(eta_stability_interval(scalar(2.0), 0.1, 0.5), UnsupportedError);
}

TEST(SpectralRadius, Examples) {
  for (double al : {0.01, 0.16, 0.64}) {
    const double eta = std::pow(1.0 - std::sqrt(al) / 2.0, 2);
    const auto sys = companion_matrix(scalar(1.0), make_params(al, 0.0, eta));
    EXPECT_NEAR(sys.rho_P, 1.0 - std::sqrt(al) / 2.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(companion_matrix(scalar(1.0), make_params(0.5, 0.0, 0.0)).rho_P, 0.5);
  EXPECT_NEAR(companion_matrix(scalar(3.0), make_params(0.1, 0.0, 1.0)).rho_P, 1.0, 1e-14);
}

// ---------------------------------------------------------------------------

TEST(NormGrowth, DiagonalMatrixGivesSqrtOrder) {
  Matrix M = Vector((Vector(4) << 0.9, -0.5, 0.3, 0.1).finished()).asDiagonal();
  EXPECT_NEAR(norm_growth_constant(M, 0.0), 2.0, 1e-12);
}

TEST(NormGrowth, JordanBlockScalesInverselyWithDelta) {
  Matrix J(2, 2);
  J << 0.7, 1.0, 0.0, 0.7;
  const double c1 = norm_growth_constant(J, 0.1);
  const double c2 = norm_growth_constant(J, 0.05);
  EXPECT_NEAR(c2 / c1, 2.0, 1e-9);
  EXPECT_LE(max_power_ratio(J, 0.8, 300), c1 * (1 + 1e-9));
  EXPECT_THROW(norm_growth_constant(J, 0.0), DomainError);
}

TEST(NormGrowth, JordanDecompositionReconstructs) {
  const Matrix S = random_matrix(4, 5) + 3.0 * Matrix::Identity(4, 4);
  {
    Matrix J = Matrix::Zero(4, 4);
    J(0, 0) = J(1, 1) = 0.5;
    J(0, 1) = 1.0;
    J(2, 2) = -0.2;
    J(3, 3) = 0.9;
    const Matrix M = S * J * S.inverse();
    const auto jd = jordan_decomposition(M);
    EXPECT_EQ(jd.largest_block, 2);
    const ComplexMatrix back = jd.S * jd.J() * jd.S.inverse();
    EXPECT_LE((back - M.cast<Complex>()).norm(), 1e-7 * M.norm());
  }
  {
    // A 3-block spreads the computed eigenvalues by about eps^(1/3).
    Matrix J = Matrix::Zero(4, 4);
    J(0, 0) = J(1, 1) = J(2, 2) = 0.5;
    J(0, 1) = J(1, 2) = 1.0;
    J(3, 3) = -0.2;
    const Matrix M = S * J * S.inverse();
    const auto jd = jordan_decomposition(M, 1e-3);
    EXPECT_EQ(jd.largest_block, 3);
    const ComplexMatrix back = jd.S * jd.J() * jd.S.inverse();
    EXPECT_LE((back - M.cast<Complex>()).norm(), 1e-4 * M.norm());
  }
}

TEST(NormGrowth, DistinctSpectrumPowerBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 5);
    Matrix M = random_matrix(n, seed);
    Eigen::EigenSolver<Matrix> es(M, false);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    M /= rho;  // spectral radius 1
    const double C = norm_growth_constant(M, 0.0);
    EXPECT_LE(max_power_ratio(M, 1.0, 200), C * (1 + 1e-8)) << "seed " << seed;
  }
}

TEST(NormGrowth, SingularValueIdentity) {
  for (std::uint64_t k = 0; k < 100; ++k) {
    const int n = 2 + static_cast<int>(k % 7);
    const Matrix M = random_matrix(n, 1000 + k);
    const Matrix Minv = M.inverse();
    Eigen::JacobiSVD<Matrix> a(M), b(Minv);
    const double lhs = 1.0 / (a.singularValues()(n - 1) * b.singularValues()(n - 1));
    const double rhs = a.singularValues()(0) * b.singularValues()(0);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
  }
}

TEST(NormGrowth, CompanionPowerBound) {
  const std::vector<QuadraticProblem> problems{make_symmetric_problem({1.0, 5.0}, 1),
                                               make_nonsymmetric_problem({1.0, 2.0, 6.0}, 4.0, 2)};
  for (const auto& p : problems)
    for (double a : {0.02, 0.1})
      for (double beta : {0.0, 1.0})
        for (double eta_scale : {0.3, 1.0}) {
          const double alpha = a / p.lambda_min();
          double eta = eta_scale * std::pow(1.0 - std::sqrt(a) / 2.0, 2);
          if (beta == 1.0) eta = std::min(1.0, eta / (1.0 - a));
          const auto sys = companion_matrix(p, make_params(alpha, beta, eta));
          const ComplexMatrix V = companion_diagonalizer(p, sys);
          ComplexVector mu(2 * p.dim());
          for (Eigen::Index i = 0; i < p.dim(); ++i) {
            mu(2 * i) = sys.eigen[i].mu_plus;
            mu(2 * i + 1) = sys.eigen[i].mu_minus;
          }
          const ComplexMatrix rebuilt = V * mu.asDiagonal() * V.inverse();
          EXPECT_LE((rebuilt - sys.P.cast<Complex>()).norm(), 1e-9);
          const double C = companion_growth_constant(p, sys);
          EXPECT_LE(max_power_ratio(sys.P, sys.rho_P, 500), C * (1 + 1e-9));
        }
}

TEST(NormGrowth, RepeatedRootHasNoDiagonalizer) {
  const auto p = scalar(1.0);
  const auto sys = companion_matrix(p, make_params(0.25, 0.0, 0.25));
  EXPECT_THROW(companion_diagonalizer(p, sys), DomainError);
}

// ---------------------------------------------------------------------------

TEST(CHat, Substitution) {
  EXPECT_DOUBLE_EQ(c_hat_bound(1.0, 1.0, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(c_hat_bound(0.04, 1.0, 1.0), 25.0);
  EXPECT_THROW(c_hat_bound(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(c_hat_bound(-1.0, 1.0, 1.0), DomainError);
}

TEST(CHat, DominatesExactDiagonalizerConstant) {
  const std::vector<QuadraticProblem> problems{scalar(1.0), make_symmetric_problem({1.0, 3.0}, 4)};
  for (const auto& p : problems)
    for (int k = 1; k <= 9; ++k) {
      const double a = std::pow(0.1 * k, 2);  // 0.01 .. 0.81
      const double alpha = a / p.lambda_min();
      if (alpha > std::pow(2.0 / (std::sqrt(p.lambda_min()) + std::sqrt(p.lambda_max())), 2))
        continue;
      const double eta = std::pow(1.0 - std::sqrt(a) / 2.0, 2);
      const auto sys = companion_matrix(p, make_params(alpha, 0.0, eta));
      const double exact = companion_growth_constant(p, sys);
      EXPECT_LE(exact, c_hat_bound(alpha, p.lambda_min(), p.table_constant()))
          << "a = " << a << " d = " << p.dim();
    }
}

TEST(DiscriminantFloor, Substitution) {
  EXPECT_DOUBLE_EQ(discriminant_floor(0.16, 1.0), 0.15);
  EXPECT_DOUBLE_EQ(discriminant_floor(1.0, 1.0), 15.0 / 16.0);
}

TEST(DiscriminantFloor, ExactDiscriminantDominates) {
  for (int k = 0; k <= 40; ++k) {
    const double a = 0.01 * std::pow(100.0, k / 40.0);  // 0.01 .. 1
    const double eta = std::pow(1.0 - std::sqrt(a) / 2.0, 2);
    const auto e = block_eigenvalues(1.0, MethodParams{a, 0.0, eta});
    EXPECT_GE(std::abs(e.delta), discriminant_floor(a, 1.0) * (1 - 1e-12)) << a;
    EXPECT_NEAR(std::norm(e.mu_plus - e.mu_minus), std::abs(e.delta), 1e-12);
  }
}

TEST(BetaReduction, SameSpectrumAsReducedMomentum) {
  for (double a : {0.1, 0.5, 0.9, 1.0})
    for (double eta : {0.0, 0.3, 0.7, 1.0})
      for (double beta : {0.2, 0.5, 1.0}) {
        const MethodParams full{a, beta, eta};
        const MethodParams reduced{a, 0.0, full.reduced_eta(1.0)};
        const auto p = scalar(1.0);
        const auto s1 = companion_matrix(p, full);
        const auto s2 = companion_matrix(p, reduced);
        EXPECT_NEAR(std::abs(s1.eigen[0].mu_plus - s2.eigen[0].mu_plus), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(s1.eigen[0].mu_minus - s2.eigen[0].mu_minus), 0.0, 1e-12);
        EXPECT_NEAR(dense_spectral_radius(s1.P), dense_spectral_radius(s2.P), 1e-7);
      }
}
