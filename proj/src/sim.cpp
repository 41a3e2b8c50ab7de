#include "ivdep/sim.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <random>

#include "ivdep/error.hpp"

namespace ivdep {

namespace {

enum Stream : std::uint32_t { kVol = 1, kPrice = 2, kJump = 3 };

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t rep, std::uint32_t stream) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32), stream};
  return std::mt19937_64(ss);
}

using Normal = boost::random::normal_distribution<double>;

void model_loadings(const SimConfig& cfg, Eigen::VectorXd& icpt, Eigen::MatrixXd& A) {
  const int K = cfg.factor_count();
  const int n = cfg.n_stocks;
  icpt = Eigen::VectorXd::Constant(n, 0.1);
  A = Eigen::MatrixXd::Zero(n, K);
  if (cfg.model_id == 1) {
    for (int j = 0; j < n; ++j) A(j, j + 1) = 1.5;
  } else {
    A.row(0) << 0.45, 1.0, 0.0, 0.4;
    A.row(1) << 0.35, 0.0, 0.3, 0.6;
  }
}

// Riemann accumulation of the limiting covariance of a set of quadratic
// covariation estimators, evaluated at the true C_t and vol-of-vol.
class Theorem1Accumulator {
 public:
  Theorem1Accumulator(const std::vector<FunctionalPair>& pairs, double theta, int d, int K)
      : pairs_(pairs), theta_(theta), d_(d), K_(K) {
    for (const auto& pr : pairs_) {
      hi_.push_back(slot(pr.h));
      gi_.push_back(slot(pr.g));
    }
    const std::size_t u = funcs_.size();
    grads_.assign(u, std::vector<double>(static_cast<std::size_t>(d) * d));
    proj_.assign(u * K_, 0.0);
    M_.assign(u * u, 0.0);
    N_.assign(u * u, 0.0);
    sum_ = Eigen::MatrixXd::Zero(pairs_.size(), pairs_.size());
  }

  bool active() const { return !pairs_.empty(); }

  // dC holds K matrices d x d (row-major); fvar[k] = sigma^2 f_k
  void add(const double* C, const std::vector<double>& dC, const std::vector<double>& fvar, double dt) {
    const std::size_t u = funcs_.size();
    const int dd = d_ * d_;
    for (std::size_t a = 0; a < u; ++a) {
      funcs_[a].evaluate(C, grads_[a].data());
      for (int k = 0; k < K_; ++k) {
        double s = 0.0;
        for (int t = 0; t < dd; ++t) s += grads_[a][t] * dC[k * dd + t];
        proj_[a * K_ + k] = s;
      }
    }
    for (std::size_t a = 0; a < u; ++a) {
      for (std::size_t b = a; b < u; ++b) {
        const auto& ga = grads_[a];
        const auto& gb = grads_[b];
        double m = 0.0;
        for (int g = 0; g < d_; ++g)
          for (int h = 0; h < d_; ++h) {
            double x = ga[g * d_ + h];
            if (x == 0.0) continue;
            double inner = 0.0;
            for (int j = 0; j < d_; ++j)
              for (int k = 0; k < d_; ++k) {
                double y = gb[j * d_ + k];
                if (y == 0.0) continue;
                inner += y * (C[g * d_ + j] * C[h * d_ + k] + C[g * d_ + k] * C[h * d_ + j]);
              }
            m += x * inner;
          }
        double nn = 0.0;
        for (int k = 0; k < K_; ++k) nn += proj_[a * K_ + k] * proj_[b * K_ + k] * fvar[k];
        M_[a * u + b] = M_[b * u + a] = m;
        N_[a * u + b] = N_[b * u + a] = nn;
      }
    }
    const double t = theta_;
    const double c1 = 6.0 / (t * t * t), c2 = 151.0 * t / 140.0, c3 = 3.0 / (2.0 * t);
    auto M = [&](std::size_t x, std::size_t y) { return M_[x * u + y]; };
    auto N = [&](std::size_t x, std::size_t y) { return N_[x * u + y]; };
    for (std::size_t r = 0; r < pairs_.size(); ++r) {
      for (std::size_t s = 0; s < pairs_.size(); ++s) {
        const std::size_t Hr = hi_[r], Gr = gi_[r], Hs = hi_[s], Gs = gi_[s];
        double s1 = M(Hr, Hs) * M(Gr, Gs) + M(Gr, Hs) * M(Hr, Gs);
        double s2 = N(Hr, Hs) * N(Gr, Gs) + N(Gr, Hs) * N(Hr, Gs);
        double s3 = M(Hr, Hs) * N(Gr, Gs) + M(Gr, Gs) * N(Hr, Hs) + M(Hr, Gs) * N(Gr, Hs) + M(Gr, Hs) * N(Hr, Gs);
        sum_(r, s) += dt * (c1 * s1 + c2 * s2 + c3 * s3);
      }
    }
  }

  Eigen::MatrixXd result() const { return sum_; }

 private:
  std::size_t slot(const Functional& f) {
    for (std::size_t i = 0; i < funcs_.size(); ++i)
      if (funcs_[i].id() == f.id()) return i;
    funcs_.push_back(f);
    return funcs_.size() - 1;
  }

  std::vector<FunctionalPair> pairs_;
  double theta_;
  int d_, K_;
  std::vector<Functional> funcs_;
  std::vector<std::size_t> hi_, gi_;
  std::vector<std::vector<double>> grads_;
  std::vector<double> proj_, M_, N_;
  Eigen::MatrixXd sum_;
};

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (model_id != 1 && model_id != 2) fail("model_id must be 1 or 2");
  if (model_id == 2 && n_stocks != 2) fail("model 2 is defined for exactly two stocks");
  if (n_stocks < 1) fail("need at least one stock");
  if (days < 1 || days_per_year < 1 || bars_per_day < 1 || substeps < 1) fail("grid sizes must be positive");
  if (!(2.0 * cir.kappa * cir.mu > cir.sigma * cir.sigma)) fail("Feller condition 2 kappa mu > sigma^2 fails");
  if (!(std::abs(leverage) <= 1.0)) fail("leverage must lie in [-1, 1]");
  if (!(idio_corr >= 0.0 && idio_corr < 1.0)) fail("idio_corr must lie in [0, 1)");
  if (!(jump_intensity >= 0.0) || !(jump_sd >= 0.0)) fail("jump parameters must be nonnegative");
  if (!theorem1_pairs.empty() && !(theorem1_theta > 0.0)) fail("theorem1_theta must be positive");
}

std::vector<double> simulate_cir(const CirParams& p, double T, double dt, std::uint64_t seed, double f0,
                                 std::size_t* floor_hits) {
  const std::size_t steps = static_cast<std::size_t>(std::llround(T / dt));
  auto eng = make_engine(seed, 0, kVol);
  Normal N;
  std::vector<double> f(steps + 1);
  f[0] = f0;
  const double sdt = std::sqrt(dt);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    double x = f[i];
    double nx = x + p.kappa * (p.mu - x) * dt + p.sigma * std::sqrt(std::max(x, 0.0)) * sdt * N(eng);
    if (nx < 0.0) {
      nx = 0.0;
      ++hits;
    }
    f[i + 1] = nx;
  }
  if (floor_hits) *floor_hits = hits;
  return f;
}

double oracle_quadcov(const std::vector<double>& h, const std::vector<double>& g) {
  if (h.size() != g.size()) throw Error(ErrorCode::GridMismatch, "latent paths on different grids");
  double s = 0.0;
  for (std::size_t i = 1; i < h.size(); ++i) s += (h[i] - h[i - 1]) * (g[i] - g[i - 1]);
  return s;
}

SimResult simulate_model(const SimConfig& cfg, std::uint64_t rep) {
  cfg.validate();
  const int n_st = cfg.n_stocks;
  const int K = cfg.factor_count();
  const int d = n_st + 1;
  const int X = n_st;  // market column
  const std::size_t n_obs = static_cast<std::size_t>(cfg.days) * cfg.bars_per_day;
  const double dn = cfg.delta_n();
  const double dt = cfg.delta_fine();
  const double sdt = std::sqrt(dt);
  const CirParams& cp = cfg.cir;
  const double rho = cfg.leverage, rho_c = std::sqrt(1.0 - rho * rho);
  const double ic = cfg.idio_corr, ic_a = std::sqrt(ic), ic_b = std::sqrt(1.0 - ic);

  SimResult res;
  ReturnPanel& P = res.panel;
  LatentPaths& L = res.latent;
  for (int j = 0; j < n_st; ++j) P.labels.push_back("Y" + std::to_string(j + 1));
  P.labels.push_back("X");
  P.factor_count = 1;
  P.delta_n = dn;
  P.log_prices.assign((n_obs + 1) * d, 0.0);
  P.day_index.resize(n_obs + 1);
  P.day_index[0] = 0;
  for (std::size_t i = 1; i <= n_obs; ++i) P.day_index[i] = static_cast<int>((i - 1) / cfg.bars_per_day);

  L.T = cfg.horizon();
  L.delta_fine = dt;
  L.cir = cp;
  L.idio_corr = ic;
  model_loadings(cfg, L.intercept, L.loadings);
  L.int_f = Eigen::VectorXd::Zero(K);
  L.realized_ff = Eigen::MatrixXd::Zero(K, K);
  L.int_czz = Eigen::MatrixXd::Zero(n_st, n_st);

  auto vol_eng = make_engine(cfg.seed, cfg.fixed_vol_path ? 0 : rep, kVol);
  auto price_eng = make_engine(cfg.seed, rep, kPrice);
  auto jump_eng = make_engine(cfg.seed, rep, kJump);
  Normal N;

  // jump times and sizes per process: stocks first, market last
  const double T = L.T;
  std::vector<std::vector<double>> jsize(d);
  L.jump_times.assign(d, {});
  if (cfg.jumps && cfg.jump_intensity > 0.0) {
    for (int p = 0; p < d; ++p) {
      boost::random::poisson_distribution<int> pois(cfg.jump_intensity * T);
      int cnt = pois(jump_eng);
      boost::random::uniform_real_distribution<double> U(0.0, T);
      for (int c = 0; c < cnt; ++c) L.jump_times[p].push_back(U(jump_eng));
      std::sort(L.jump_times[p].begin(), L.jump_times[p].end());
      for (int c = 0; c < cnt; ++c) jsize[p].push_back(cfg.jump_sd * N(jump_eng));
    }
  }
  std::vector<std::size_t> jnext(d, 0);

  const double f0 = cfg.f0 < 0.0 ? cp.mu : cfg.f0;
  std::vector<double> f(K, f0), fn(K), df(K), cz(n_st), sq_cz(n_st), xi(K), eta(n_st);
  if (cfg.store_fine_factors) {
    L.fine_factors.assign(K, {});
    for (int k = 0; k < K; ++k) {
      L.fine_factors[k].reserve(n_obs * cfg.substeps + 1);
      L.fine_factors[k].push_back(f0);
    }
  }
  if (cfg.store_true_cov) L.true_cov.assign((n_obs + 1) * d * d, 0.0);

  Theorem1Accumulator t1(cfg.theorem1_pairs, cfg.theorem1_theta, d, K);
  std::vector<double> Ct(d * d), dC(static_cast<std::size_t>(K) * d * d), fvar(K);

  auto czs = [&]() {
    for (int j = 0; j < n_st; ++j) {
      double v = L.intercept(j);
      for (int k = 0; k < K; ++k) v += L.loadings(j, k) * f[k];
      cz[j] = v;
      sq_cz[j] = std::sqrt(v);
    }
  };
  auto beta_at = [&](double t) { return cfg.beta0 + cfg.beta_amp * std::sin(cfg.beta_freq * t); };

  auto fill_true_cov = [&](double beta) {
    const double f1 = f[0];
    for (int i = 0; i < n_st; ++i) {
      for (int j = i; j < n_st; ++j) {
        double v = beta * beta * f1 + (i == j ? cz[i] : ic * sq_cz[i] * sq_cz[j]);
        Ct[i * d + j] = Ct[j * d + i] = v;
      }
      Ct[i * d + X] = Ct[X * d + i] = beta * f1;
    }
    Ct[X * d + X] = f1;
  };
  auto fill_dC = [&](double beta) {
    for (int k = 0; k < K; ++k) {
      double* D = &dC[static_cast<std::size_t>(k) * d * d];
      const double e1 = k == 0 ? 1.0 : 0.0;
      for (int i = 0; i < n_st; ++i) {
        for (int j = i; j < n_st; ++j) {
          double v;
          if (i == j)
            v = beta * beta * e1 + L.loadings(i, k);
          else
            v = beta * beta * e1 +
                ic * (L.loadings(i, k) * cz[j] + cz[i] * L.loadings(j, k)) / (2.0 * sq_cz[i] * sq_cz[j]);
          D[i * d + j] = D[j * d + i] = v;
        }
        D[i * d + X] = D[X * d + i] = beta * e1;
      }
      D[X * d + X] = e1;
      fvar[k] = cp.sigma * cp.sigma * f[k];
    }
  };

  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  std::vector<double> price(d, 0.0);
  double t = 0.0;
  czs();
  for (std::size_t i = 0; i < n_obs; ++i) {
    const double t_obs = static_cast<double>(i) * dn;
    if (cfg.store_true_cov || t1.active()) {
      double b = beta_at(t_obs);
      fill_true_cov(b);
      if (cfg.store_true_cov) std::copy(Ct.begin(), Ct.end(), L.true_cov.begin() + i * d * d);
      if (t1.active()) {
        fill_dC(b);
        t1.add(Ct.data(), dC, fvar, dn);
      }
    }
    for (int s = 0; s < cfg.substeps; ++s) {
      t = t_obs + s * dt;
      const double beta = beta_at(t);
      for (int k = 0; k < K; ++k) xi[k] = N(vol_eng);
      const double eps = N(price_eng);
      const double eta0 = N(price_eng);
      for (int j = 0; j < n_st; ++j) eta[j] = N(price_eng);

      const double dW = sdt * (rho * xi[0] + rho_c * eps);
      const double dXc = std::sqrt(f[0]) * dW;
      price[X] += dXc;
      for (int j = 0; j < n_st; ++j) {
        const double dWt = sdt * (ic_a * eta0 + ic_b * eta[j]);
        price[j] += beta * dXc + sq_cz[j] * dWt;
        L.int_czz(j, j) += cz[j] * dt;
        for (int m = j + 1; m < n_st; ++m) L.int_czz(j, m) += ic * sq_cz[j] * sq_cz[m] * dt;
      }

      for (int k = 0; k < K; ++k) {
        L.int_f(k) += f[k] * dt;
        double nx = f[k] + cp.kappa * (cp.mu - f[k]) * dt + cp.sigma * std::sqrt(f[k]) * sdt * xi[k];
        if (nx < 0.0) {
          nx = 0.0;
          ++L.floor_hits;
        }
        df[k] = nx - f[k];
        f[k] = nx;
      }
      for (int a = 0; a < K; ++a)
        for (int b = a; b < K; ++b) L.realized_ff(a, b) += df[a] * df[b];
      sx += df[0];
      sy += dW;
      sxx += df[0] * df[0];
      syy += dW * dW;
      sxy += df[0] * dW;
      if (cfg.store_fine_factors)
        for (int k = 0; k < K; ++k) L.fine_factors[k].push_back(f[k]);
      czs();
    }
    const double t_end = static_cast<double>(i + 1) * dn;
    for (int p = 0; p < d; ++p) {
      while (jnext[p] < L.jump_times[p].size() && L.jump_times[p][jnext[p]] < t_end) {
        price[p] += jsize[p][jnext[p]];
        ++jnext[p];
      }
    }
    std::copy(price.begin(), price.end(), P.log_prices.begin() + (i + 1) * d);
  }
  if (cfg.store_true_cov) {
    fill_true_cov(beta_at(static_cast<double>(n_obs) * dn));
    std::copy(Ct.begin(), Ct.end(), L.true_cov.begin() + n_obs * d * d);
  }
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < a; ++b) L.realized_ff(a, b) = L.realized_ff(b, a);
  for (int a = 0; a < n_st; ++a)
    for (int b = 0; b < a; ++b) L.int_czz(a, b) = L.int_czz(b, a);
  L.fine_steps = n_obs * cfg.substeps;
  const double m = static_cast<double>(L.fine_steps);
  L.leverage_corr = (sxy - sx * sy / m) / std::sqrt((sxx - sx * sx / m) * (syy - sy * sy / m));
  if (t1.active()) L.theorem1_sigma = t1.result();
  return res;
}

namespace {

// rows: C_X, C_Z1..C_Zn as coefficient vectors on f
Eigen::MatrixXd coefficient_rows(const LatentPaths& lat) {
  const int n = static_cast<int>(lat.loadings.rows());
  const int K = static_cast<int>(lat.loadings.cols());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n + 1, K);
  R(0, 0) = 1.0;
  R.bottomRows(n) = lat.loadings;
  return R;
}

}  // namespace

Eigen::MatrixXd latent_quadcov(const LatentPaths& lat) {
  Eigen::MatrixXd R = coefficient_rows(lat);
  return R * lat.realized_ff * R.transpose();
}

Eigen::MatrixXd affine_quadcov(const LatentPaths& lat) {
  Eigen::MatrixXd R = coefficient_rows(lat);
  const double s2 = lat.cir.sigma * lat.cir.sigma;
  return R * (s2 * lat.int_f).asDiagonal() * R.transpose();
}

LatentTruth latent_truth(const Eigen::MatrixXd& qc, int j, int s) {
  const int a = j + 1, b = s + 1;
  LatentTruth t;
  const double pp = qc(0, 0);
  t.qc_js = qc(a, b);
  t.qc_jx = qc(0, a);
  t.gamma_j = qc(0, a) / pp;
  const double gs = qc(0, b) / pp;
  t.r2_j = t.gamma_j * t.gamma_j * pp / qc(a, a);
  t.corr = qc(a, b) / std::sqrt(qc(a, a) * qc(b, b));
  t.resid_js = qc(a, b) - t.gamma_j * pp * gs;
  const double rjj = qc(a, a) - t.gamma_j * pp * t.gamma_j;
  const double rss = qc(b, b) - gs * pp * gs;
  t.corr_resid = t.resid_js / std::sqrt(rjj * rss);
  return t;
}

double latent_corr_idio_returns(const LatentPaths& lat, int i, int j) {
  return lat.int_czz(i, j) / std::sqrt(lat.int_czz(i, i) * lat.int_czz(j, j));
}

}  // namespace ivdep
