#include "ivdep/factors.hpp"

#include <cmath>
#include <limits>

#include "ivdep/error.hpp"
#include "ivdep/spot.hpp"

namespace ivdep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd invert_pipi(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) throw Error(ErrorCode::SingularFactorQuadCov, "[Pi,Pi] estimate is not finite");
  if (A.rows() == 1) {
    if (A(0, 0) == 0.0) throw Error(ErrorCode::SingularFactorQuadCov, "[Pi,Pi] estimate is zero");
    return Eigen::MatrixXd::Constant(1, 1, 1.0 / A(0, 0));
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularFactorQuadCov, "[Pi,Pi] estimate is singular");
  return lu.inverse();
}

}  // namespace

IdioVolModelSpec::IdioVolModelSpec(int d, int stock_, std::vector<int> fcols, std::vector<Functional> pi_)
    : stock(stock_), factor_cols(std::move(fcols)), pi(std::move(pi_)) {
  if (pi.empty()) throw Error(ErrorCode::DimensionMismatch, "IdioVol model needs at least one factor Pi");
  for (const auto& f : pi)
    if (f.dim() != d) throw Error(ErrorCode::DimensionMismatch, "Pi has the wrong dimension");
  idiovol = Functional::idiovol(d, stock, factor_cols);
}

std::vector<Functional> IdioVolModelSpec::factor_variances(int d, const std::vector<int>& fcols) {
  std::vector<Functional> out;
  for (int f : fcols) out.push_back(Functional::entry(d, f, f));
  return out;
}

PairStack PairStack::build(const IdioVolModelSpec& j, const IdioVolModelSpec& s) {
  if (j.pi.size() != s.pi.size())
    throw Error(ErrorCode::DimensionMismatch, "stocks use IdioVol factor lists of different length");
  PairStack st;
  st.d_pi = static_cast<int>(j.pi.size());
  st.pairs.push_back({j.idiovol, j.idiovol});
  st.pairs.push_back({s.idiovol, s.idiovol});
  st.pairs.push_back({j.idiovol, s.idiovol});
  for (int k = 0; k < st.d_pi; ++k)
    for (int l = k; l < st.d_pi; ++l) st.pairs.push_back({j.pi[k], j.pi[l]});
  for (int k = 0; k < st.d_pi; ++k) st.pairs.push_back({j.pi[k], j.idiovol});
  for (int k = 0; k < st.d_pi; ++k) st.pairs.push_back({j.pi[k], s.idiovol});
  return st;
}

std::size_t PairStack::a(int k, int l) const {
  if (k > l) std::swap(k, l);
  // row-wise upper triangle offset
  std::size_t off = static_cast<std::size_t>(k) * d_pi - static_cast<std::size_t>(k) * (k - 1) / 2;
  return 3 + off + (l - k);
}
std::size_t PairStack::bj(int k) const { return 3 + static_cast<std::size_t>(d_pi) * (d_pi + 1) / 2 + k; }
std::size_t PairStack::bs(int k) const { return bj(0) + d_pi + k; }

Eigen::VectorXd estimate_stack(EstimationContext& ctx, const PairStack& st, Method m) {
  Eigen::VectorXd v(st.size());
  for (std::size_t r = 0; r < st.size(); ++r) v(r) = ctx.estimate(st.pairs[r].h, st.pairs[r].g, m).value;
  return v;
}

namespace {

struct Pieces {
  Eigen::MatrixXd A, Ainv;
  Eigen::VectorXd bj, bs, gj, gs;
};

Pieces pieces(const PairStack& st, const Eigen::VectorXd& v) {
  Pieces p;
  const int m = st.d_pi;
  p.A.resize(m, m);
  p.bj.resize(m);
  p.bs.resize(m);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) p.A(k, l) = v(st.a(k, l));
    p.bj(k) = v(st.bj(k));
    p.bs(k) = v(st.bs(k));
  }
  p.Ainv = invert_pipi(p.A);
  p.gj = p.Ainv * p.bj;
  p.gs = p.Ainv * p.bs;
  return p;
}

// gradient of x' A^{-1} y over the stack; x, y pick b_j or b_s
void add_quad_grad(const PairStack& st, const Pieces& p, bool x_is_j, bool y_is_j, double w, Eigen::VectorXd& g) {
  const Eigen::VectorXd& gx = x_is_j ? p.gj : p.gs;
  const Eigen::VectorXd& gy = y_is_j ? p.gj : p.gs;
  for (int k = 0; k < st.d_pi; ++k) {
    g(x_is_j ? st.bj(k) : st.bs(k)) += w * gy(k);
    g(y_is_j ? st.bj(k) : st.bs(k)) += w * gx(k);
    for (int l = 0; l < st.d_pi; ++l) g(st.a(k, l)) -= w * gx(k) * gy(l);
  }
}

Derived finish(double value, const Eigen::VectorXd& g, const AvarMatrix* sigma, double delta_n) {
  Derived d;
  d.value = value;
  d.valid = std::isfinite(value);
  if (!sigma || !d.valid) {
    d.se = kNaN;
    return d;
  }
  double var = delta_method_var(g, *sigma);
  d.se = var >= 0.0 ? std::sqrt(std::sqrt(delta_n) * var) : kNaN;
  return d;
}

Derived invalid() { return {kNaN, kNaN, false}; }

// x / sqrt(y z) with gradients of x, y, z supplied
Derived ratio_corr(double x, double y, double z, const Eigen::VectorXd& gx, const Eigen::VectorXd& gy,
                   const Eigen::VectorXd& gz, const AvarMatrix* sigma, double delta_n) {
  if (!(y > 0.0) || !(z > 0.0)) return invalid();
  double rt = std::sqrt(y * z);
  double val = x / rt;
  Eigen::VectorXd g = gx / rt - (x / (2.0 * y * rt)) * gy - (x / (2.0 * z * rt)) * gz;
  return finish(val, g, sigma, delta_n);
}

}  // namespace

PairAnalysis derive_pair(const PairStack& st, const Eigen::VectorXd& v, const AvarMatrix* sigma, double delta_n,
                         Method m, bool one_sided) {
  const Eigen::Index K = static_cast<Eigen::Index>(st.size());
  if (v.size() != K) throw Error(ErrorCode::DimensionMismatch, "stack estimate length mismatch");
  if (sigma && sigma->sigma.rows() != K) throw Error(ErrorCode::DimensionMismatch, "stack covariance size mismatch");
  PairAnalysis out;
  out.method = m;
  out.blocks = v;
  auto unit = [&](std::size_t i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
    e(i) = 1.0;
    return e;
  };
  const double cjj = v(st.cjj()), css = v(st.css()), cjs = v(st.cjs());

  out.qc_js = finish(cjs, unit(st.cjs()), sigma, delta_n);
  out.corr = ratio_corr(cjs, cjj, css, unit(st.cjs()), unit(st.cjj()), unit(st.css()), sigma, delta_n);

  TestResult bad;
  bad.valid = false;
  bad.statistic = bad.p_value = bad.standard_error = kNaN;
  bad.note = "no covariance estimate";
  out.h1 = sigma ? t_test_quadcov(cjs, sigma->sigma(st.cjs(), st.cjs()), delta_n, one_sided) : bad;
  out.h2_j = out.h2_s = out.h3 = bad;
  if (sigma) {
    Eigen::VectorXd bj(st.d_pi), bs(st.d_pi);
    Eigen::MatrixXd Sj(st.d_pi, st.d_pi), Ss(st.d_pi, st.d_pi);
    for (int k = 0; k < st.d_pi; ++k) {
      bj(k) = v(st.bj(k));
      bs(k) = v(st.bs(k));
      for (int l = 0; l < st.d_pi; ++l) {
        Sj(k, l) = sigma->sigma(st.bj(k), st.bj(l));
        Ss(k, l) = sigma->sigma(st.bs(k), st.bs(l));
      }
    }
    out.h2_j = wald_test(bj, Sj, delta_n);
    out.h2_s = wald_test(bs, Ss, delta_n);
  }

  Pieces p;
  try {
    p = pieces(st, v);
  } catch (const Error&) {
    out.resid_js = out.corr_resid = out.r2_j = out.r2_s = out.q = invalid();
    out.h3.note = "SingularFactorQuadCov";
    return out;
  }
  out.gamma_j = p.gj;
  out.gamma_s = p.gs;
  for (int c = 0; c < st.d_pi; ++c) {
    for (int which = 0; which < 2; ++which) {
      const Eigen::VectorXd& gam = which == 0 ? p.gj : p.gs;
      Eigen::VectorXd g = Eigen::VectorXd::Zero(K);
      for (int l = 0; l < st.d_pi; ++l) g(which == 0 ? st.bj(l) : st.bs(l)) += p.Ainv(c, l);
      for (int k = 0; k < st.d_pi; ++k)
        for (int l = 0; l < st.d_pi; ++l) g(st.a(k, l)) -= p.Ainv(c, k) * gam(l);
      (which == 0 ? out.gamma_j_d : out.gamma_s_d).push_back(finish(gam(c), g, sigma, delta_n));
    }
  }

  const double qjs = p.bj.dot(p.gs), qjj = p.bj.dot(p.gj), qss = p.bs.dot(p.gs);
  Eigen::VectorXd gq_js = Eigen::VectorXd::Zero(K), gq_jj = gq_js, gq_ss = gq_js;
  add_quad_grad(st, p, true, false, 1.0, gq_js);
  add_quad_grad(st, p, true, true, 1.0, gq_jj);
  add_quad_grad(st, p, false, false, 1.0, gq_ss);

  Eigen::VectorXd g_rjs = unit(st.cjs()) - gq_js;
  Eigen::VectorXd g_rjj = unit(st.cjj()) - gq_jj;
  Eigen::VectorXd g_rss = unit(st.css()) - gq_ss;
  const double rjs = cjs - qjs, rjj = cjj - qjj, rss = css - qss;
  out.resid_js = finish(rjs, g_rjs, sigma, delta_n);
  out.corr_resid = ratio_corr(rjs, rjj, rss, g_rjs, g_rjj, g_rss, sigma, delta_n);
  if (sigma) out.h3 = t_test_quadcov(rjs, delta_method_var(g_rjs, *sigma), delta_n, one_sided);

  if (cjj > 0.0)
    out.r2_j = finish(qjj / cjj, gq_jj / cjj - (qjj / (cjj * cjj)) * unit(st.cjj()), sigma, delta_n);
  else
    out.r2_j = invalid();
  if (css > 0.0)
    out.r2_s = finish(qss / css, gq_ss / css - (qss / (css * css)) * unit(st.css()), sigma, delta_n);
  else
    out.r2_s = invalid();
  if (cjs != 0.0)
    out.q = finish(qjs / cjs, gq_js / cjs - (qjs / (cjs * cjs)) * unit(st.cjs()), sigma, delta_n);
  else
    out.q = invalid();
  return out;
}

PairAnalysis analyze_pair(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s, Method m,
                          bool with_inference) {
  PairStack st = PairStack::build(j, s);
  Eigen::VectorXd v = estimate_stack(ctx, st, m);
  if (!with_inference) return derive_pair(st, v, nullptr, ctx.path().delta_n(), m);
  AvarMatrix a = ctx.avar(st.pairs);
  return derive_pair(st, v, &a, ctx.path().delta_n(), m);
}

GammaResult gamma_loadings(EstimationContext& ctx, const IdioVolModelSpec& spec, Method m, bool with_avar) {
  const int dp = static_cast<int>(spec.pi.size());
  std::vector<FunctionalPair> pairs;
  for (int k = 0; k < dp; ++k)
    for (int l = k; l < dp; ++l) pairs.push_back({spec.pi[k], spec.pi[l]});
  const int na = static_cast<int>(pairs.size());
  for (int k = 0; k < dp; ++k) pairs.push_back({spec.pi[k], spec.idiovol});

  GammaResult r;
  r.pipi.resize(dp, dp);
  r.pic.resize(dp);
  std::vector<double> est(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) est[i] = ctx.estimate(pairs[i].h, pairs[i].g, m).value;
  auto aidx = [&](int k, int l) {
    if (k > l) std::swap(k, l);
    return k * dp - k * (k - 1) / 2 + (l - k);
  };
  for (int k = 0; k < dp; ++k) {
    for (int l = 0; l < dp; ++l) r.pipi(k, l) = est[aidx(k, l)];
    r.pic(k) = est[na + k];
  }
  Eigen::MatrixXd Ainv = invert_pipi(r.pipi);
  r.gamma = Ainv * r.pic;
  if (with_avar) {
    AvarMatrix s = ctx.avar(pairs);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dp, static_cast<Eigen::Index>(pairs.size()));
    for (int c = 0; c < dp; ++c) {
      for (int l = 0; l < dp; ++l) J(c, na + l) += Ainv(c, l);
      for (int k = 0; k < dp; ++k)
        for (int l = 0; l < dp; ++l) J(c, aidx(k, l)) -= Ainv(c, k) * r.gamma(l);
    }
    r.avar = J * s.sigma * J.transpose();
  }
  return r;
}

QuadCovEstimate resid_quadcov(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s,
                              Method m) {
  PairStack st = PairStack::build(j, s);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(st.size());
  QuadCovEstimate base;
  for (std::size_t r = 2; r < st.size(); ++r) {
    auto e = ctx.estimate(st.pairs[r].h, st.pairs[r].g, m);
    v(r) = e.value;
    if (r == st.cjs()) base = e;
  }
  Pieces p = pieces(st, v);
  base.value = v(st.cjs()) - p.bj.dot(p.gs);
  base.pair_id = "resid(" + j.idiovol.name() + "," + s.idiovol.name() + ")";
  base.negative_flag = j.idiovol.id() == s.idiovol.id() && base.value < 0.0;
  return base;
}

double corr_idiovol(EstimationContext& ctx, const Functional& czj, const Functional& czs, Method m) {
  if (czj.id() == czs.id()) {
    double v = ctx.estimate(czj, czj, m).value;
    if (!(v > 0.0)) throw Error(ErrorCode::NonpositiveDiagonal, "[C_Zj,C_Zj] estimate is not positive");
    return 1.0;
  }
  double x = ctx.estimate(czj, czs, m).value;
  double y = ctx.estimate(czj, czj, m).value;
  double z = ctx.estimate(czs, czs, m).value;
  if (!(y > 0.0) || !(z > 0.0)) throw Error(ErrorCode::NonpositiveDiagonal, "diagonal quadratic variation not positive");
  return x / std::sqrt(y * z);
}

double corr_resid(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s, Method m) {
  double x = resid_quadcov(ctx, j, s, m).value;
  if (j.idiovol.id() == s.idiovol.id()) {
    if (!(x > 0.0)) throw Error(ErrorCode::NonpositiveDiagonal, "residual variation not positive");
    return 1.0;
  }
  double y = resid_quadcov(ctx, j, j, m).value;
  double z = resid_quadcov(ctx, s, s, m).value;
  if (!(y > 0.0) || !(z > 0.0)) throw Error(ErrorCode::NonpositiveDiagonal, "residual variation not positive");
  return x / std::sqrt(y * z);
}

double r2_idiovolfm(EstimationContext& ctx, const IdioVolModelSpec& spec, Method m) {
  GammaResult g = gamma_loadings(ctx, spec, m, false);
  double c = ctx.estimate(spec.idiovol, spec.idiovol, m).value;
  if (!(c > 0.0)) throw Error(ErrorCode::NonpositiveDiagonal, "[C_Zj,C_Zj] estimate is not positive");
  return g.gamma.dot(g.pipi * g.gamma) / c;
}

double q_measure(EstimationContext& ctx, const IdioVolModelSpec& j, const IdioVolModelSpec& s, Method m) {
  GammaResult gj = gamma_loadings(ctx, j, m, false);
  GammaResult gs = gamma_loadings(ctx, s, m, false);
  double c = ctx.estimate(j.idiovol, s.idiovol, m).value;
  if (c == 0.0) throw Error(ErrorCode::ZeroDenominator, "[C_Zj,C_Zs] estimate is zero");
  return gj.gamma.dot(gj.pipi * gs.gamma) / c;
}

namespace {

struct BlockIntegrals {
  Eigen::MatrixXd idio;  // integrated idiosyncratic covariance among stocks
  Eigen::VectorXd total; // integrated total variance of each stock
};

BlockIntegrals block_integrals(const ReturnPanel& panel, int l_n, const std::vector<int>& stocks,
                               const EstimatorConfig* cfg) {
  panel.validate();
  const int d = static_cast<int>(panel.d());
  const int dF = panel.factor_count;
  const std::size_t n = panel.n();
  if (dF < 1) throw Error(ErrorCode::DimensionMismatch, "panel has no factor columns");
  if (l_n <= dF + 1 || static_cast<std::size_t>(l_n) > n)
    throw Error(ErrorCode::BlockTooShort, "block length " + std::to_string(l_n) + " unusable");
  TruncationThresholds th;
  bool trunc = cfg && cfg->price_trunc_enabled;
  if (trunc) {
    EstimatorConfig c = *cfg;
    c.delta_n = panel.delta_n;
    th = compute_thresholds(panel, c);
  }
  std::vector<int> fac;
  for (int f = d - dF; f < d; ++f) fac.push_back(f);
  const int ns = static_cast<int>(stocks.size());
  BlockIntegrals out;
  out.idio = Eigen::MatrixXd::Zero(ns, ns);
  out.total = Eigen::VectorXd::Zero(ns);
  // Wishart mean of the plug-in residual covariance is (l - d_F)/l times the truth
  const double dof = static_cast<double>(l_n) / static_cast<double>(l_n - dF);
  Eigen::MatrixXd S(d, d);
  Eigen::VectorXd x(d);
  for (std::size_t start = 0; start + l_n <= n; start += l_n) {
    S.setZero();
    for (std::size_t i = start; i < start + l_n; ++i) {
      bool keep = true;
      for (int a = 0; a < d; ++a) {
        x(a) = panel.increment(i, a);
        if (trunc && std::abs(x(a)) > th.at(a, th.slot_of_increment[i])) keep = false;
      }
      if (keep) S.noalias() += x * x.transpose();
    }
    // S is the block integral of C; the residual block is S_ss - S_sF S_FF^{-1} S_Fs
    Eigen::MatrixXd SFF(dF, dF);
    for (int p = 0; p < dF; ++p)
      for (int q = 0; q < dF; ++q) SFF(p, q) = S(fac[p], fac[q]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(SFF);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularFactorBlock, "factor block singular in a block");
    Eigen::MatrixXd SsF(ns, dF);
    for (int a = 0; a < ns; ++a)
      for (int q = 0; q < dF; ++q) SsF(a, q) = S(stocks[a], fac[q]);
    Eigen::MatrixXd proj = SsF * lu.solve(SsF.transpose());
    for (int a = 0; a < ns; ++a) {
      out.total(a) += S(stocks[a], stocks[a]);
      for (int b = 0; b < ns; ++b) out.idio(a, b) += dof * (S(stocks[a], stocks[b]) - proj(a, b));
    }
  }
  return out;
}

}  // namespace

double integrated_r2_rfm(const ReturnPanel& panel, int l_n, int j, const EstimatorConfig* cfg) {
  BlockIntegrals b = block_integrals(panel, l_n, {j}, cfg);
  if (!(b.total(0) > 0.0)) throw Error(ErrorCode::NonpositiveDiagonal, "stock has zero integrated variance");
  return 1.0 - b.idio(0, 0) / b.total(0);
}

double corr_idio_returns(const ReturnPanel& panel, int l_n, int i, int j, const EstimatorConfig* cfg) {
  BlockIntegrals b = block_integrals(panel, l_n, {i, j}, cfg);
  if (!(b.idio(0, 0) > 0.0) || !(b.idio(1, 1) > 0.0))
    throw Error(ErrorCode::NonpositiveDiagonal, "idiosyncratic variance not positive");
  return b.idio(0, 1) / std::sqrt(b.idio(0, 0) * b.idio(1, 1));
}

}  // namespace ivdep
