#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ivdep/avar.hpp"
#include "ivdep/inference.hpp"
#include "ivdep/panel.hpp"
#include "ivdep/quadcov.hpp"

namespace ivdep {

// Stock j's idiosyncratic variance against the return factors, and the
// IdioVol factors Pi_k it loads on.
struct IdioVolModelSpec {
  int stock = 0;
  std::vector<int> factor_cols;
  std::vector<Functional> pi;
  Functional idiovol;

  IdioVolModelSpec() = default;
  IdioVolModelSpec(int d, int stock, std::vector<int> factor_cols, std::vector<Functional> pi);

  // Pi = variances of the return factors (the default IdioVol factors)
  static std::vector<Functional> factor_variances(int d, const std::vector<int>& factor_cols);
};

struct GammaResult {
  Eigen::VectorXd gamma;
  Eigen::MatrixXd avar;  // asymptotic covariance of gamma (same scale as Sigma)
  Eigen::MatrixXd pipi;  // [Pi, Pi]
  Eigen::VectorXd pic;   // [Pi, C_Z]
};

GammaResult gamma_loadings(EstimationContext& ctx, const IdioVolModelSpec& spec, Method m,
                           bool with_avar = true);
QuadCovEstimate resid_quadcov(EstimationContext& ctx, const IdioVolModelSpec& j,
                              const IdioVolModelSpec& s, Method m);
double corr_idiovol(EstimationContext& ctx, const Functional& czj, const Functional& czs, Method m);
double corr_resid(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s, Method m);
double r2_idiovolfm(EstimationContext& ctx, const IdioVolModelSpec& spec, Method m);
double q_measure(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s, Method m);

// Stack of quadratic covariations used by every pairwise quantity:
//   [Zj,Zj], [Zs,Zs], [Zj,Zs], [Pi_k,Pi_l] (k<=l), [Pi_k,Zj], [Pi_k,Zs]
struct PairStack {
  std::vector<FunctionalPair> pairs;
  int d_pi = 0;

  static PairStack build(const IdioVolModelSpec& j, const IdioVolModelSpec& s);
  std::size_t size() const { return pairs.size(); }
  std::size_t cjj() const { return 0; }
  std::size_t css() const { return 1; }
  std::size_t cjs() const { return 2; }
  std::size_t a(int k, int l) const;
  std::size_t bj(int k) const;
  std::size_t bs(int k) const;
};

struct Derived {
  double value = 0.0;
  double se = 0.0;  // sqrt(delta_n^{1/2} g' Sigma g); NaN when unavailable
  bool valid = true;
};

struct PairAnalysis {
  Method method = Method::LIN;
  Eigen::VectorXd blocks;  // stack estimates
  Eigen::VectorXd gamma_j, gamma_s;
  Derived qc_js, resid_js, corr, corr_resid, r2_j, r2_s, q;
  std::vector<Derived> gamma_j_d, gamma_s_d;
  TestResult h1;    // [Zj,Zs] = 0
  TestResult h2_j;  // [Zj,Pi] = 0
  TestResult h2_s;
  TestResult h3;    // residual covariation = 0
};

Eigen::VectorXd estimate_stack(EstimationContext& ctx, const PairStack& st, Method m);

// Derived quantities, standard errors and tests from stack estimates; sigma may be null
PairAnalysis derive_pair(const PairStack& st, const Eigen::VectorXd& blocks, const AvarMatrix* sigma,
                         double delta_n, Method m, bool one_sided = false);

PairAnalysis analyze_pair(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s,
                          Method m, bool with_inference = true);

// Block-wise spot plug-in diagnostics; l_n observations per block, factors are
// the panel's trailing factor_count columns.
double integrated_r2_rfm(const ReturnPanel& panel, int l_n, int j,
                         const EstimatorConfig* trunc_cfg = nullptr);
double corr_idio_returns(const ReturnPanel& panel, int l_n, int i, int j,
                         const EstimatorConfig* trunc_cfg = nullptr);

}  // namespace ivdep
