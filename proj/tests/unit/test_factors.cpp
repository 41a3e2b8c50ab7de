#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "ivdep/error.hpp"
#include "ivdep/factors.hpp"
#include "ivdep/sim.hpp"

using namespace ivdep;

namespace {

// Columns: stock 0, stock 1, factor 2. Factor variance x follows a positive
// random walk; the idiosyncratic variances are exact affine functions
// z0 = 0.1 + 0.5 x and z1 = 0.2 + 0.3 x + w with w an independent walk.
SpotCovPath constructed_path(std::mt19937_64& rng, std::size_t L = 120, int k = 4) {
  std::normal_distribution<double> z;
  const Eigen::Vector3d beta(0.8, 1.2, 1.0);
  double x = 0.09, w = 0.05;
  std::vector<double> vals;
  for (std::size_t p = 0; p < L; ++p) {
    x = std::max(0.02, x + 0.004 * z(rng));
    w = std::max(0.01, w + 0.003 * z(rng));
    Eigen::Matrix3d C = beta * beta.transpose() * x;
    C(0, 0) += 0.1 + 0.5 * x;
    C(1, 1) += 0.2 + 0.3 * x + w;
    C(0, 1) += 0.01;
    C(1, 0) += 0.01;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) vals.push_back(C(a, b));
  }
  return SpotCovPath(3, k, 0.001, std::move(vals));
}

IdioVolModelSpec spec(int stock) { return IdioVolModelSpec(3, stock, {2}, IdioVolModelSpec::factor_variances(3, {2})); }

}  // namespace

TEST(Factors, ExactFactorStructure) {
  std::mt19937_64 rng(2);
  SpotCovPath path = constructed_path(rng);
  EstimationContext ctx(path, nullptr);
  IdioVolModelSpec s0 = spec(0), s1 = spec(1);
  GammaResult g0 = gamma_loadings(ctx, s0, Method::Naive);
  GammaResult g1 = gamma_loadings(ctx, s1, Method::Naive);
  ASSERT_EQ(g0.gamma.size(), 1);
  EXPECT_NEAR(g0.gamma(0), 0.5, 1e-8);
  EXPECT_NEAR(g1.gamma(0), 0.3, 0.3);  // w adds noise, not bias in expectation
  EXPECT_NEAR(r2_idiovolfm(ctx, s0, Method::Naive), 1.0, 1e-8);
  EXPECT_LT(r2_idiovolfm(ctx, s1, Method::Naive), 1.0);
  EXPECT_NEAR(resid_quadcov(ctx, s0, s0, Method::Naive).value, 0.0, 1e-8);
  EXPECT_EQ(corr_idiovol(ctx, s0.idiovol, s0.idiovol, Method::Naive), 1.0);
  EXPECT_NEAR(q_measure(ctx, s0, s0, Method::Naive), 1.0, 1e-8);
  EXPECT_NEAR(q_measure(ctx, s1, s1, Method::Naive), r2_idiovolfm(ctx, s1, Method::Naive), 1e-12);
}

TEST(Factors, DecompositionIdentity) {
  std::mt19937_64 rng(3);
  for (Method m : {Method::AN, Method::LIN}) {
    SpotCovPath path = testing_util::random_path(3, 4, 120, 0.001, rng);
    EstimationContext ctx(path, nullptr);
    IdioVolModelSpec s0 = spec(0), s1 = spec(1);
    double resid = resid_quadcov(ctx, s0, s1, m).value;
    GammaResult g0 = gamma_loadings(ctx, s0, m, false), g1 = gamma_loadings(ctx, s1, m, false);
    double full = ctx.estimate(s0.idiovol, s1.idiovol, m).value;
    EXPECT_NEAR(resid + g0.gamma.dot(g0.pipi * g1.gamma), full, 1e-12 * (1.0 + std::abs(full)));
  }
}

TEST(Factors, GammaPermutationInvariance) {
  std::mt19937_64 rng(4);
  SpotCovPath path = testing_util::random_path(3, 4, 120, 0.001, rng);
  EstimationContext ctx(path, nullptr);
  Functional x = Functional::entry(3, 2, 2), v1 = Functional::entry(3, 1, 1);
  IdioVolModelSpec a(3, 0, {2}, {x, v1}), b(3, 0, {2}, {v1, x});
  GammaResult ga = gamma_loadings(ctx, a, Method::LIN), gb = gamma_loadings(ctx, b, Method::LIN);
  EXPECT_NEAR(ga.gamma(0), gb.gamma(1), 1e-10 * (1 + std::abs(ga.gamma(0))));
  EXPECT_NEAR(ga.gamma(1), gb.gamma(0), 1e-10 * (1 + std::abs(ga.gamma(1))));
  EXPECT_NEAR(ga.avar(0, 0), gb.avar(1, 1), 1e-8 * (1 + std::abs(ga.avar(0, 0))));
}

TEST(Factors, SingularPiBlock) {
  SpotCovPath path = testing_util::constant_path(3, 4, 60, 0.001, Eigen::Matrix3d::Identity());
  EstimationContext ctx(path, nullptr);
  try {
    gamma_loadings(ctx, spec(0), Method::Naive);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularFactorQuadCov);
  }
}

TEST(Factors, PairStackLayout) {
  Functional x = Functional::entry(4, 3, 3), y = Functional::entry(4, 2, 2);
  IdioVolModelSpec j(4, 0, {2, 3}, {x, y}), s(4, 1, {2, 3}, {x, y});
  PairStack st = PairStack::build(j, s);
  // 3 stock blocks, 3 [Pi,Pi] blocks, 2 + 2 cross blocks
  EXPECT_EQ(st.size(), 10u);
  EXPECT_EQ(st.a(0, 1), st.a(1, 0));
  EXPECT_EQ(st.pairs[st.bj(1)].h.id(), y.id());
  EXPECT_EQ(st.pairs[st.bs(0)].g.id(), s.idiovol.id());
}

TEST(Factors, AnalyzePairOnSimulatedPanel) {
  SimConfig s;
  s.model_id = 2;
  s.days = 252;
  s.seed = 31;
  SimResult r = simulate_model(s, 0);
  EstimatorConfig c;
  c.delta_n = s.delta_n();
  ReturnPanel sub = r.panel.select({0, 1, 2}, 1);  // two stocks and the return factor
  SpotCovPath path = estimate_spot_path(sub, c);
  auto mask = estimation_mask(path, c);
  EstimationContext ctx(path, mask ? &*mask : nullptr);
  IdioVolModelSpec j = spec(0), k = spec(1);
  PairAnalysis a = analyze_pair(ctx, j, k, Method::LIN);
  EXPECT_EQ(a.blocks.size(), 6);
  EXPECT_TRUE(std::isfinite(a.corr.value));
  EXPECT_TRUE(std::isfinite(a.gamma_j(0)));
  EXPECT_GT(a.qc_js.se, 0.0);
  EXPECT_TRUE(a.h1.valid);
  EXPECT_GE(a.h1.p_value, 0.0);
  EXPECT_LE(a.h1.p_value, 1.0);
  EXPECT_NEAR(a.resid_js.value + a.gamma_j.dot(a.gamma_s) * a.blocks(3), a.qc_js.value,
              1e-12 * (1 + std::abs(a.qc_js.value)));
}

TEST(Factors, IntegratedR2OfFactorCopyIsOne) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  ReturnPanel p;
  p.labels = {"S", "F"};
  p.factor_count = 1;
  p.delta_n = 1.0 / (252.0 * 78.0);
  double x = 0;
  for (int i = 0; i <= 780; ++i) {
    if (i) x += 0.3 * std::sqrt(p.delta_n) * z(rng);
    p.log_prices.insert(p.log_prices.end(), {x, x});
    p.day_index.push_back(i == 0 ? 0 : (i - 1) / 78);
  }
  EXPECT_NEAR(integrated_r2_rfm(p, 24, 0), 1.0, 1e-12);
}

TEST(Factors, IntegratedR2ZeroBeta) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  ReturnPanel p;
  p.labels = {"S1", "S2", "F"};
  p.factor_count = 1;
  p.delta_n = 1.0 / (252.0 * 390.0);
  const double sd = std::sqrt(p.delta_n);
  std::vector<double> cur(3, 0.0);
  for (int i = 0; i <= 390 * 40; ++i) {
    if (i) {
      double e1 = z(rng), e2 = 0.4 * e1 + std::sqrt(1 - 0.16) * z(rng);
      cur[0] += 0.3 * sd * e1;
      cur[1] += 0.2 * sd * e2;
      cur[2] += 0.2 * sd * z(rng);
    }
    p.log_prices.insert(p.log_prices.end(), cur.begin(), cur.end());
    p.day_index.push_back(i == 0 ? 0 : (i - 1) / 390);
  }
  EXPECT_LT(std::abs(integrated_r2_rfm(p, 120, 0)), 0.02);
  EXPECT_NEAR(corr_idio_returns(p, 120, 0, 1), 0.4, 0.05);
  try {
    integrated_r2_rfm(p, 2, 0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BlockTooShort);
  }
}
