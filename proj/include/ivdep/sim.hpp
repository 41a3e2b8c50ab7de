#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ivdep/panel.hpp"
#include "ivdep/quadcov.hpp"

namespace ivdep {

struct CirParams {
  double kappa = 5.0;
  double mu = 0.09;
  double sigma = 0.35;
};

struct SimConfig {
  int model_id = 2;        // 1: C_Zj = 0.1 + 1.5 f_{j+1};  2: two stocks sharing f4 and C_X
  int n_stocks = 2;        // model 1 only may exceed 2
  int days = 2520;
  int days_per_year = 252;
  int bars_per_day = 78;   // 5-minute bars over 6.5 hours
  int substeps = 10;       // fine steps per observation
  std::uint64_t seed = 1;
  double leverage = -0.8;
  CirParams cir;
  double f0 = -1.0;        // initial factor level; negative means cir.mu
  double jump_intensity = 2.0;  // per year, each of the stock and market jump processes
  double jump_sd = 0.02;
  bool jumps = true;
  double idio_corr = 0.4;
  double beta0 = 0.5, beta_amp = 0.1, beta_freq = 100.0;
  bool fixed_vol_path = false;  // same volatility realisation in every replication

  // optional extras
  bool store_fine_factors = false;   // factor paths on the fine grid
  bool store_true_cov = false;       // true C at each observation, panel column order
  std::vector<FunctionalPair> theorem1_pairs;  // Riemann plug-in of the limiting covariance
  double theorem1_theta = 0.0;

  double delta_n() const { return 1.0 / (static_cast<double>(days_per_year) * bars_per_day); }
  double delta_fine() const { return delta_n() / substeps; }
  double horizon() const { return static_cast<double>(days) / days_per_year; }
  int factor_count() const { return model_id == 2 ? 4 : n_stocks + 1; }
  void validate() const;
};

struct LatentPaths {
  double T = 0.0;
  double delta_fine = 0.0;
  std::size_t fine_steps = 0;
  std::size_t floor_hits = 0;
  CirParams cir;

  // C_X = f_1 and C_Zj = intercept_j + loadings.row(j) . f, with f = (f_1..f_K)
  Eigen::VectorXd intercept;
  Eigen::MatrixXd loadings;  // n_stocks x K
  double idio_corr = 0.0;

  Eigen::VectorXd int_f;        // int f_k dt (left Riemann on the fine grid)
  Eigen::MatrixXd realized_ff;  // sum of df_a df_b on the fine grid
  Eigen::MatrixXd int_czz;      // int C_{Zi Zj} dt (idiosyncratic return covariance)
  double leverage_corr = 0.0;   // sample corr of df_1 and dW over fine steps

  std::vector<std::vector<double>> jump_times;  // stock 1..n, then market
  std::vector<std::vector<double>> fine_factors;  // K paths, fine_steps+1 points each
  std::vector<double> true_cov;                   // (n+1) x d x d
  Eigen::MatrixXd theorem1_sigma;
};

struct SimResult {
  ReturnPanel panel;
  LatentPaths latent;
};

// panel columns: Y_1..Y_n, X (one return factor, last)
SimResult simulate_model(const SimConfig& cfg, std::uint64_t rep);

// standalone full-truncation Euler CIR path with fine_steps+1 points
std::vector<double> simulate_cir(const CirParams& p, double T, double delta_fine, std::uint64_t seed,
                                 double f0, std::size_t* floor_hits = nullptr);

// sum of dH dG over a common grid
double oracle_quadcov(const std::vector<double>& h, const std::vector<double>& g);

// Realized fine-grid quadratic covariation of the latent variance processes.
// Index 0 is C_X, index j (1..n) is C_Zj.
Eigen::MatrixXd latent_quadcov(const LatentPaths& lat);
// Same through the affine Ito form sigma^2 sum_k a_jk a_sk int f_k dt.
Eigen::MatrixXd affine_quadcov(const LatentPaths& lat);

// True values of the pairwise estimands for stocks (j, s) with Pi = C_X.
struct LatentTruth {
  double gamma_j = 0.0, r2_j = 0.0, corr = 0.0, corr_resid = 0.0;
  double qc_js = 0.0, qc_jx = 0.0, resid_js = 0.0;
};
LatentTruth latent_truth(const Eigen::MatrixXd& qc, int j, int s);

// int C_{Zi Zj} / sqrt(int C_Zi int C_Zj)
double latent_corr_idio_returns(const LatentPaths& lat, int i, int j);

}  // namespace ivdep
