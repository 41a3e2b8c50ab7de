#include <gtest/gtest.h>

#include <random>

#include "ivdep/inference.hpp"

using namespace ivdep;

TEST(TTest, ZeroEstimate) {
  TestResult r = t_test_quadcov(0.0, 2.0, 0.01);
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(TTest, Scaling) {
  // delta_n^{-1/4} = 10 at delta_n = 1e-4
  TestResult r = t_test_quadcov(0.196, 1.0, 1e-4);
  EXPECT_NEAR(r.statistic, 1.96, 1e-12);
  EXPECT_NEAR(r.p_value, 0.04999579, 1e-7);
  EXPECT_NEAR(r.standard_error, 0.1, 1e-12);
  TestResult neg = t_test_quadcov(-0.196, 1.0, 1e-4);
  EXPECT_EQ(neg.statistic, -r.statistic);
  EXPECT_EQ(neg.p_value, r.p_value);
  TestResult up = t_test_quadcov(0.196, 1.0, 1e-4, true);
  EXPECT_NEAR(up.p_value, r.p_value / 2, 1e-12);
  EXPECT_NEAR(t_test_quadcov(-0.196, 1.0, 1e-4, true).p_value, 1 - r.p_value / 2, 1e-12);
}

TEST(TTest, InvalidVariance) {
  for (double v : {0.0, -1.0, std::nan("")}) {
    TestResult r = t_test_quadcov(1.0, v, 0.01);
    EXPECT_FALSE(r.valid);
    EXPECT_TRUE(std::isnan(r.p_value));
    EXPECT_FALSE(r.note.empty());
  }
}

TEST(Wald, ZeroVector) {
  TestResult r = wald_test(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 0.01);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.dof, 2);
}

TEST(Wald, OneDimensionMatchesTTest) {
  for (double est : {0.01, -0.03, 0.2}) {
    Eigen::VectorXd v(1);
    v << est;
    Eigen::MatrixXd S(1, 1);
    S << 0.7;
    TestResult w = wald_test(v, S, 1e-3), t = t_test_quadcov(est, 0.7, 1e-3);
    EXPECT_NEAR(w.statistic, t.statistic * t.statistic, 1e-10 * (1 + w.statistic));
    EXPECT_NEAR(w.p_value, t.p_value, 1e-12);
  }
}

TEST(Wald, ReparameterizationInvariance) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd B(3, 3), M(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        B(i, j) = z(rng);
        M(i, j) = z(rng);
      }
    Eigen::MatrixXd S = B * B.transpose() + Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd v(3);
    v << z(rng), z(rng), z(rng);
    v *= 0.05;
    TestResult a = wald_test(v, S, 1e-3), b = wald_test(M * v, M * S * M.transpose(), 1e-3);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-8 * (1 + a.statistic));
  }
}

TEST(Wald, SingularSigmaInvalid) {
  Eigen::Matrix2d S;
  S << 1, 1, 1, 1;
  TestResult r = wald_test(Eigen::Vector2d(1, 0), S, 0.01);
  EXPECT_FALSE(r.valid);
  EXPECT_TRUE(std::isnan(r.p_value));
}

TEST(Fdr, StepUpExample) {
  FdrResult r = fdr_bh({0.001, 0.02, 0.04, 0.2}, 0.05);
  EXPECT_EQ(r.reject, (std::vector<bool>{true, true, false, false}));
  EXPECT_DOUBLE_EQ(r.threshold, 0.02);
  // order of input does not matter
  FdrResult s = fdr_bh({0.2, 0.04, 0.001, 0.02}, 0.05);
  EXPECT_EQ(s.reject, (std::vector<bool>{false, false, true, true}));
}

TEST(Fdr, AllOnesRejectNothing) {
  FdrResult r = fdr_bh(std::vector<double>(10, 1.0), 0.05);
  for (bool b : r.reject) EXPECT_FALSE(b);
  EXPECT_EQ(r.threshold, 0.0);
}

TEST(Fdr, InvalidEntriesExcluded) {
  FdrResult r = fdr_bh({0.001, std::nan(""), 1.5, 0.01}, 0.05);
  EXPECT_EQ(r.excluded, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.reject, (std::vector<bool>{true, false, false, true}));
}

TEST(Fdr, MonotoneInQ) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(200);
  for (auto& x : p) x = std::pow(u(rng), 3);
  std::vector<bool> prev(p.size(), false);
  for (double q : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
    FdrResult r = fdr_bh(p, q);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (prev[i]) EXPECT_TRUE(r.reject[i]);
    prev = r.reject;
  }
}

TEST(Fdr, ByIsMoreConservative) {
  std::vector<double> p{0.001, 0.008, 0.014, 0.03, 0.5};
  FdrResult bh = fdr_bh(p, 0.05), by = fdr_bh(p, 0.05, FdrProcedure::BY);
  // c(5) = 1 + 1/2 + 1/3 + 1/4 + 1/5 = 2.2833; BY thresholds 0.00438, 0.00876, ...
  EXPECT_EQ(bh.reject, (std::vector<bool>{true, true, true, true, false}));
  EXPECT_EQ(by.reject, (std::vector<bool>{true, true, false, false, false}));
}

TEST(Fdr, GlobalNullFalseRejectionRate) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  double any = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> p(5356);
    for (auto& x : p) x = u(rng);
    FdrResult f = fdr_bh(p, 0.05);
    for (bool b : f.reject)
      if (b) {
        any += 1;
        break;
      }
  }
  // under the global null FDP is 1{any rejection}, so FDR = P(any) <= q
  double rate = any / reps, se = std::sqrt(0.05 * 0.95 / reps);
  EXPECT_LE(rate, 0.05 + 3 * se);
}

TEST(Distributions, Tails) {
  EXPECT_NEAR(normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
  EXPECT_NEAR(chi2_upper_p(3.841458820694124, 1), 0.05, 1e-12);
  EXPECT_NEAR(chi2_upper_p(5.991464547107979, 2), 0.05, 1e-12);
  EXPECT_DOUBLE_EQ(chi2_upper_p(0.0, 3), 1.0);
}
