#include "lsam/dynamics.hpp"
#include "lsam/theory.hpp"
#include "lsam/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace lsam;

namespace {

QuadraticProblem scalar(double lambda) { return make_symmetric_problem({lambda}, 0); }

std::vector<double> geom(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, i / double(n - 1)));
  return v;
}

// alpha*lambda on a geometric grid, eta on a uniform grid plus the repeated root.
template <class F>
void for_each_grid_point(F&& f) {
  for (double a : geom(1e-3, 1.0, 60)) {
    std::vector<double> etas;
    for (int k = 0; k <= 100; ++k) etas.push_back(k / 100.0);
    etas.push_back(std::pow(1.0 - std::sqrt(a), 2));
    for (double eta : etas) f(a, eta);
  }
}

}  // namespace

TEST(TunedParams, SgdExample) {
  const auto mp = table1_params(Method::sgd, make_symmetric_problem({1.0, 10.0}, 2), 0.1, 1.0);
  EXPECT_DOUBLE_EQ(mp.alpha, 0.025);
  EXPECT_EQ(mp.eta, 0.0);
  EXPECT_EQ(mp.beta, 0.0);
  EXPECT_EQ(mp.method, Method::sgd);
}

TEST(TunedParams, HeavyBallNoiseless) {
  const auto mp = table1_params(Method::shb, scalar(1.0), 0.3, 0.0);
  EXPECT_DOUBLE_EQ(mp.alpha, 1.0);
  EXPECT_DOUBLE_EQ(mp.eta, 0.25);
  EXPECT_EQ(mp.beta, 0.0);
}

TEST(TunedParams, NesterovMomentumAboveOneIsRejected) {
  EXPECT_THROW(table1_params(Method::asg, scalar(1.0), 0.3, 0.0), DomainError);
}

TEST(TunedParams, NesterovStepNeverExceedsInverseLambdaMax) {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (double K : {0.01, 1.0, 100.0})
      for (double eps : {1e-4, 1e-2, 1.0}) {
        const auto p = make_symmetric_problem({1.0, 2.0 + static_cast<double>(seed), 50.0}, seed);
        const auto mp = table1_params(Method::asg, p, eps, K);
        EXPECT_LE(mp.alpha, 1.0 / p.lambda_max());
        EXPECT_EQ(mp.beta, 1.0);
        const double base = std::pow(1.0 - std::sqrt(mp.alpha) / 2.0, 2);
        EXPECT_NEAR(mp.eta, base / (1.0 - mp.alpha), 1e-15);
      }
}

TEST(TunedParams, EpsilonCapBindsForSmallEpsilon) {
  const auto p = scalar(1.0);
  const double K = 2.0, eps = 1e-4;
  EXPECT_DOUBLE_EQ(table1_params(Method::sgd, p, eps, K).alpha, eps / (4.0 * K));
  EXPECT_DOUBLE_EQ(table1_params(Method::shb, p, eps, K).alpha, std::pow(eps / (200.0 * K), 2));
}

TEST(TunedParams, NonsymmetricUsesDiagonalizerConstant) {
  const auto p = make_nonsymmetric_problem({1.0, 2.0}, 10.0, 3);
  const double C = p.table_constant();
  EXPECT_GT(C, 1.0);
  const double eps = 1e-3, K = 1.0;
  EXPECT_DOUBLE_EQ(table1_params(Method::sgd, p, eps, K).alpha, eps / (4.0 * C * C * K));
}

TEST(TunedParams, Validation) {
  EXPECT_THROW(table1_params(Method::sgd, scalar(1.0), 0.0, 1.0), ValidationError);
  EXPECT_THROW(table1_params(Method::sgd, scalar(1.0), 0.1, -1.0), ValidationError);
  EXPECT_THROW(table1_params(Method::generic, scalar(1.0), 0.1, 1.0), ValidationError);
}

// ---------------------------------------------------------------------------

TEST(LowerBound, Examples) {
  EXPECT_NEAR(lower_bound_n0(0.01, 1.0, 1.0, 1.0), std::log(100.0) / 0.64, 1e-12);
  EXPECT_NEAR(lower_bound_n0(0.01, 1.0, 1.0, 1.0), 7.196, 1e-3);
  EXPECT_EQ(lower_bound_n0(0.01, 0.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(lower_bound_n0(0.01, 3.0, 2.0, 5.0) * 4.0, lower_bound_n0(0.01, 3.0, 1.0, 5.0),
              1e-12);
  EXPECT_THROW(lower_bound_n0(1.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(lower_bound_n0(1.0, 1.0, 1.0, 0.5), DomainError);
}

TEST(Eligibility, Examples) {
  EXPECT_TRUE(epsilon_eligibility(0.01, 1.0, 1.0));
  EXPECT_FALSE(epsilon_eligibility(0.1, 1.0, 1.0));
  EXPECT_TRUE(epsilon_eligibility(1.0, 32.0, 1.0));
}

TEST(UpperBound, SgdExample) {
  const auto p = make_symmetric_problem({1.0, 10.0}, 1);
  const double n = upper_bound_n(Method::sgd, p, make_params(0.025, 0.0, 0.0), 0.1, 1.0);
  EXPECT_NEAR(n, 40.0 * std::log(20.0), 1e-10);
  EXPECT_NEAR(n, 119.8, 0.05);
}

TEST(UpperBound, HeavyBallFirstTermVanishes) {
  const auto p = scalar(1.0);
  const double a = 0.04;
  const double n = upper_bound_n(Method::shb, p, make_params(a, 0.0, 0.81), 50.0, 1.0);
  EXPECT_NEAR(n, 4.0 / std::sqrt(a) * std::log(1.0 / a), 1e-12);
}

TEST(UpperBound, ClampsAtZeroAndRejectsZeroStep) {
  const auto p = scalar(1.0);
  EXPECT_EQ(upper_bound_n(Method::sgd, p, make_params(0.5, 0.0, 0.0), 10.0, 1.0), 0.0);
  MethodParams bad{0.0, 0.0, 0.0};
  EXPECT_THROW(upper_bound_n(Method::sgd, p, bad, 0.1, 1.0), DomainError);
}

TEST(UpperBound, OrderMatchesLowerBoundUpToLog) {
  // With the epsilon cap binding, upper / lower grows at most like one more log.
  const auto p = scalar(1.0);
  const double K = 1.0, Lambda = 1.0;
  for (Method m : {Method::sgd, Method::shb}) {
    for (double eps : geom(1e-5, 1e-2, 10)) {
      const auto mp = table1_params(m, p, eps, K);
      const double up = upper_bound_n(m, p, mp, eps, Lambda);
      const double lo = lower_bound_n0(eps, K, 1.0, Lambda);
      const double ratio = up / lo;
      EXPECT_GE(ratio, 1.0);
      EXPECT_LE(ratio, 1e5 * std::log(Lambda / eps)) << to_string(m) << " eps=" << eps;
    }
  }
}

TEST(Classify, Branches) {
  EXPECT_EQ(classify(MethodParams{0.1, 0.7, 0.0}), Method::sgd);
  EXPECT_EQ(classify(MethodParams{0.1, 0.0, 0.5}), Method::shb);
  EXPECT_EQ(classify(MethodParams{0.1, 1.0, 0.5}), Method::asg);
  EXPECT_EQ(classify(MethodParams{0.1, 0.5, 0.5, Method::shb}), Method::shb);
  EXPECT_THROW(classify(MethodParams{0.1, 0.5, 0.5}), UnsupportedError);
}

// ---------------------------------------------------------------------------

TEST(HFunction, Examples) {
  EXPECT_NEAR(h_function(0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(h_function(0.0, 0.5), 3.0, 1e-15);
  EXPECT_THROW(h_function(0.5, 0.0), ValidationError);
}

TEST(HFunction, GridProperties) {
  int complex_points = 0, repeated_points = 0;
  for_each_grid_point([&](double a, double eta) {
    const auto e = block_eigenvalues(1.0, MethodParams{a, 0.0, eta});
    if (e.branch == Branch::complex) ++complex_points;
    if (e.branch == Branch::repeated) ++repeated_points;
    const double rho = e.radius();
    EXPECT_LE(h_function(eta, a) * (1.0 - rho), 8.0 + 1e-9) << a << " " << eta;
    const Complex prod = (1.0 - e.mu_plus) * (1.0 - e.mu_minus);
    EXPECT_NEAR(prod.real(), a, 1e-12);
    EXPECT_NEAR(prod.imag(), 0.0, 1e-12);
  });
  EXPECT_GT(complex_points, 0);
  EXPECT_GT(repeated_points, 0);
}

TEST(OneMinusSquares, ComplexPairIsReal) {
  const Complex mu = std::polar(0.8, 1.1);
  const double v = one_minus_squares(mu, std::conj(mu));
  EXPECT_NEAR(v, std::norm(1.0 - mu * mu), 1e-14);
  EXPECT_THROW(one_minus_squares(mu, mu), DomainError);
}

// ---------------------------------------------------------------------------

TEST(VarianceFloor, SmallStepExpansion) {
  const double lambda = 2.0, K = 3.0;
  for (double a : {1e-3, 1e-5, 1e-7}) {
    const double alpha = a / lambda;
    const double floor = lemma1_variance_floor(alpha, 0.0, K, 1.0 - a, 0.0);
    EXPECT_NEAR(floor, alpha * alpha * K / (2.0 * (1.0 - (1.0 - a) * (1.0 - a))), 1e-15);
    EXPECT_NEAR(floor / (alpha * K / (4.0 * lambda)), 1.0, a);
  }
}

TEST(VarianceFloor, InfiniteWhenVarianceDiverges) {
  EXPECT_EQ(lemma1_variance_floor(0.1, 1.0, 1.0, 0.5, 0.5), kInfinity);
  EXPECT_EQ(lemma1_variance_floor(0.1, 0.5, 1.0, 1.0, 0.5), kInfinity);
}

TEST(VarianceFloor, RepeatedRootIsTheLimit) {
  const double a = 0.09;
  const double eta = std::pow(1.0 - std::sqrt(a), 2);
  const auto at = block_eigenvalues(1.0, MethodParams{a, 0.0, eta});
  ASSERT_EQ(at.branch, Branch::repeated);
  const double v = lemma1_variance_floor(a, eta, 1.0, at.mu_plus, at.mu_minus);
  for (double off : {1e-6, -1e-6}) {
    const auto near = block_eigenvalues(1.0, MethodParams{a, 0.0, eta + off});
    const double w = lemma1_variance_floor(a, eta + off, 1.0, near.mu_plus, near.mu_minus);
    EXPECT_NEAR(w / v, 1.0, 1e-4);
  }
}

TEST(VarianceFloor, ExactSumDominatesFloor) {
  const auto p = scalar(1.0);
  for (double a : geom(0.01, 1.0, 12))
    for (double eta : {0.0, 0.2, 0.5, 0.8, std::pow(1.0 - std::sqrt(a), 2)}) {
      const auto e = block_eigenvalues(1.0, MethodParams{a, 0.0, eta});
      if (e.radius() >= 0.999) continue;
      const auto bv = bias_variance_decomposition(p, make_params(a, 0.0, eta), 1.0,
                                                  Vector::Ones(1), 20000);
      const double floor = lemma1_variance_floor(a, eta, 1.0, e.mu_plus, e.mu_minus);
      EXPECT_GE(bv.variance_lb, floor * (1.0 - 1e-9)) << a << " " << eta;
    }
}

TEST(GapFloor, Examples) {
  EXPECT_EQ(lemma2_floor(3.0, 2.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(lemma2_floor(16.0, 1.0, 0.5), 0.5);
}

TEST(GapFloor, ChainBelowVarianceFloor) {
  const double lambda = 1.0, K = 1.0;
  for_each_grid_point([&](double a, double eta) {
    const auto e = block_eigenvalues(lambda, MethodParams{a, 0.0, eta});
    const double rho = e.radius();
    if (rho >= 1.0 || eta >= 1.0) return;
    const double l1 = lemma1_variance_floor(a, eta, K, e.mu_plus, e.mu_minus);
    EXPECT_GE(l1, lemma2_floor(K, lambda, rho) * (1.0 - 1e-9)) << a << " " << eta;
  });
}

TEST(SpectralGap, Examples) {
  EXPECT_DOUBLE_EQ(lemma3_gap(1.0 / 32.0, 1.0, 1.0), 0.5);
  EXPECT_LT(lemma3_gap(1e-12, 1.0, 1.0), 1e-10);
}

TEST(SpectralGap, GapHoldsWheneverBiasIsSmall) {
  const double K = 1.0, lambda = 1.0, Lambda = 1.0;
  int checked = 0;
  for (double eps : {1.0 / 32.0, 1.0 / 64.0, 1e-3}) {
    ASSERT_TRUE(epsilon_eligibility(eps, K, lambda));
    const double n0 = lower_bound_n0(eps, K, lambda, Lambda);
    for_each_grid_point([&](double a, double eta) {
      const double rho = block_eigenvalues(lambda, MethodParams{a, 0.0, eta}).radius();
      if (std::pow(rho, 2.0 * n0) > eps) return;
      ++checked;
      EXPECT_GE(1.0 - rho, lemma3_gap(eps, K, lambda)) << a << " " << eta;
    });
  }
  EXPECT_GT(checked, 0);
}

// ---------------------------------------------------------------------------

TEST(AsymptoticTrace, Example) {
  EXPECT_NEAR(shb_asymptotic_trace(scalar(1.0), 0.1, 0.0), 0.2 / 1.9, 1e-15);
  EXPECT_THROW(shb_asymptotic_trace(scalar(1.0), 0.1, 1.0), ValidationError);
  EXPECT_THROW(shb_asymptotic_trace(scalar(1.0), 2.5, 0.0), DomainError);
}

TEST(AsymptoticTrace, OptimalRatio) {
  for (double kappa : {1.0, 4.0, 100.0, 1e4}) {
    const Vector eig = (Vector(2) << 1.0, kappa).finished();
    const double s = std::sqrt(kappa);
    EXPECT_NEAR(trace_ratio(eig), 0.5 * (s + 1.0 / s), 1e-9 * s) << kappa;
  }
}

TEST(AsymptoticTrace, StationaryCorrespondence) {
  for (double lambda : {0.5, 1.0, 4.0})
    for (double al : {0.05, 0.5, 1.5})
      for (double m : {0.0, 0.3, 0.9}) {
        const double alpha = al / lambda;
        const auto st = stationary_covariance(scalar(lambda), make_params(alpha, 0.0, m),
                                              Matrix::Constant(1, 1, 2.0));
        const double closed = shb_asymptotic_trace(scalar(lambda), alpha, m);
        EXPECT_NEAR(st.trace_mse, closed, 1e-9 * closed);
      }
  const auto p = make_symmetric_problem({1.0, 3.0, 9.0}, 4);
  const auto st = stationary_covariance(p, make_params(0.05, 0.0, 0.6), 2.0 * Matrix::Identity(3, 3));
  EXPECT_NEAR(st.trace_mse, shb_asymptotic_trace(p, 0.05, 0.6), 1e-9);
}

// ---------------------------------------------------------------------------

TEST(BoundReport, TunedDefaults) {
  const auto p = make_symmetric_problem({1.0, 10.0}, 1);
  const auto r = make_bound_report(Method::shb, p, 0.01, 1.0, 4.0);
  EXPECT_TRUE(r.alpha_in_table_range);
  EXPECT_TRUE(r.epsilon_small_enough);
  ASSERT_TRUE(r.n0_lower.has_value());
  EXPECT_DOUBLE_EQ(*r.n0_lower, lower_bound_n0(0.01, 1.0, 1.0, 4.0));
  EXPECT_DOUBLE_EQ(r.n0_upper, upper_bound_n(Method::shb, p, r.params, 0.01, 4.0));
  EXPECT_GE(r.n0_upper, 0.0);
  EXPECT_EQ(r.C, 1.0);
  EXPECT_DOUBLE_EQ(r.C_hat, c_hat_bound(r.params.alpha, 1.0, 1.0));
}

TEST(BoundReport, FlagsAndMissingLower) {
  const auto p = scalar(1.0);
  const auto off = make_bound_report(Method::sgd, p, 0.5, 1.0, 0.25, make_params(0.9, 0.0, 0.0));
  EXPECT_FALSE(off.alpha_in_table_range);
  EXPECT_FALSE(off.epsilon_small_enough);
  EXPECT_FALSE(off.n0_lower.has_value());
  EXPECT_DOUBLE_EQ(off.params.alpha, 0.9);
}

// ---------------------------------------------------------------------------

TEST(Suites, CoarseGridsPass) {
  const auto grid = GridResolution::coarse();
  for (const char* name : {"lemma2", "lemma1", "theorem1", "a2"}) {
    const auto rep = run_suite(name, grid);
    EXPECT_FALSE(rep.rows.empty()) << name;
    EXPECT_TRUE(rep.passed()) << name << " worst: "
                              << (rep.worst() ? rep.worst()->point : std::string("-"));
  }
  EXPECT_THROW(run_suite("nope", grid), ValidationError);
}
