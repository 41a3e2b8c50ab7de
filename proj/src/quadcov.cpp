#include "ivdep/quadcov.hpp"

#include <algorithm>

#include "ivdep/avar.hpp"
#include "ivdep/error.hpp"
#include "ivdep/summation.hpp"

namespace ivdep {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::AN: return "an";
    case Method::LIN: return "lin";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "naive" || s == "Naive" || s == "NAIVE") return Method::Naive;
  if (s == "an" || s == "AN") return Method::AN;
  if (s == "lin" || s == "LIN") return Method::LIN;
  throw Error(ErrorCode::ConfigError, "unknown method '" + s + "'");
}

GradientSeries compute_series(const Functional& f, const SpotCovPath& path) {
  if (f.dim() != path.d())
    throw Error(ErrorCode::DimensionMismatch, f.name() + " has dimension " + std::to_string(f.dim()) +
                                                  ", path has " + std::to_string(path.d()));
  const int d = path.d();
  const std::size_t L = path.size();
  GradientSeries s;
  s.support = f.support();
  for (int idx : s.support) {
    s.row.push_back(idx / d);
    s.col.push_back(idx % d);
  }
  const std::size_t m = s.support.size();
  s.value.resize(L);
  s.grad.resize(L * m);
  std::vector<double> g(static_cast<std::size_t>(d) * d);
  for (std::size_t p = 0; p < L; ++p) {
    s.value[p] = f.evaluate(path.data(p), g.data());
    double* out = s.grad.data() + p * m;
    for (std::size_t t = 0; t < m; ++t) out[t] = g[s.support[t]];
  }
  return s;
}

EstimationContext::EstimationContext(const SpotCovPath& path, const VolJumpMask* mask, std::string fp)
    : path_(path), mask_(mask), fingerprint_(std::move(fp)) {
  if (mask_ && mask_->size() != path_.size())
    throw Error(ErrorCode::MaskRangeError, "mask length " + std::to_string(mask_->size()) +
                                               " differs from path length " + std::to_string(path_.size()));
}

const GradientSeries& EstimationContext::series(const Functional& f) {
  auto it = cache_.find(f.id());
  if (it != cache_.end()) return *it->second;
  auto s = std::make_unique<GradientSeries>(compute_series(f, path_));
  auto& ref = *s;
  cache_.emplace(f.id(), std::move(s));
  return ref;
}

double EstimationContext::ell(const GradientSeries& s, std::size_t p, std::size_t q) const {
  // sum over support of dP(C_p) * (C_{q+k} - C_q)
  const double* a = path_.data(q + path_.k_n());
  const double* b = path_.data(q);
  const double* g = s.g(p);
  double v = 0.0;
  for (std::size_t t = 0; t < s.nnz(); ++t) v += g[t] * (a[s.support[t]] - b[s.support[t]]);
  return v;
}

double EstimationContext::m_term(const GradientSeries& P, const GradientSeries& Q, std::size_t p) const {
  const int d = path_.d();
  const double* C = path_.data(p);
  const double* gp = P.g(p);
  const double* gq = Q.g(p);
  double v = 0.0;
  for (std::size_t t = 0; t < P.nnz(); ++t) {
    if (gp[t] == 0.0) continue;
    const int g = P.row[t], h = P.col[t];
    double inner = 0.0;
    for (std::size_t u = 0; u < Q.nnz(); ++u) {
      const int j = Q.row[u], k = Q.col[u];
      inner += gq[u] * (C[g * d + j] * C[h * d + k] + C[g * d + k] * C[h * d + j]);
    }
    v += gp[t] * inner;
  }
  return v;
}

bool EstimationContext::indicator(std::size_t p, int span) const {
  if (!mask_) return true;
  const std::size_t k = path_.k_n();
  bool ok = true;
  for (int j = 0; j < span; ++j) {
    std::size_t q = p + j * k;
    if (!mask_->defined(q))
      throw Error(ErrorCode::MaskRangeError, "A-event undefined at window " + std::to_string(q));
    ok = ok && mask_->ok(q);
  }
  return ok;
}

void EstimationContext::check_length(std::size_t windows_needed, const char* what) const {
  if (path_.size() < windows_needed)
    throw Error(ErrorCode::PathTooShort, std::string(what) + " needs at least " +
                                             std::to_string(windows_needed) + " windows, path has " +
                                             std::to_string(path_.size()));
}

namespace {

std::string pair_name(const Functional& H, const Functional& G) { return H.name() + "|" + G.name(); }

}  // namespace

AnParts EstimationContext::an_parts(const Functional& H, const Functional& G) {
  const std::size_t k = path_.k_n();
  check_length(3 * k + 1, "AN estimator");
  const auto& sh = series(H);
  const auto& sg = series(G);
  const std::size_t L = path_.size();
  PairwiseSum raw, corr;
  for (std::size_t p = k; p + 2 * k < L; ++p) {
    bool on = indicator(p, 2);
    double dh = sh.value[p + k] - sh.value[p];
    double dg = sg.value[p + k] - sg.value[p];
    raw.add(on ? dh * dg : 0.0);
    corr.add(on ? m_term(sh, sg, p) : 0.0);
  }
  double kk = static_cast<double>(k);
  return {raw.result() / kk, -(3.0 / (2.0 * kk)) * (2.0 / kk) * corr.result()};
}

QuadCovEstimate EstimationContext::estimate(const Functional& H, const Functional& G, Method m) {
  const std::size_t k = path_.k_n();
  const std::size_t L = path_.size();
  const double kk = static_cast<double>(k);
  QuadCovEstimate out;
  out.method = m;
  out.pair_id = pair_name(H, G);
  out.config_fingerprint = fingerprint_;
  const auto& sh = series(H);
  const auto& sg = series(G);
  PairwiseSum acc;
  if (m == Method::Naive) {
    check_length(k + 1, "naive estimator");
    for (std::size_t p = 0; p + k < L; ++p)
      acc.add((sh.value[p + k] - sh.value[p]) * (sg.value[p + k] - sg.value[p]));
    out.value = acc.result() / kk;
    out.summand_count = out.active_count = acc.count();
  } else {
    check_length(3 * k + 1, "bias-corrected estimator");
    const double c = 3.0 / (2.0 * kk);
    for (std::size_t p = k; p + 2 * k < L; ++p) {
      if (!indicator(p, 2)) {
        acc.add(0.0);
        continue;
      }
      double prod;
      if (m == Method::AN)
        prod = (sh.value[p + k] - sh.value[p]) * (sg.value[p + k] - sg.value[p]);
      else
        prod = ell(sh, p, p) * ell(sg, p, p);
      acc.add(c * (prod - (2.0 / kk) * m_term(sh, sg, p)));
      ++out.active_count;
    }
    out.value = acc.result();
    out.summand_count = acc.count();
  }
  out.negative_flag = H.id() == G.id() && out.value < 0.0;
  return out;
}

OmegaTerms EstimationContext::omega(const Functional& Hr, const Functional& Gr, const Functional& Hs,
                                    const Functional& Gs) {
  AvarMatrix a = avar({{Hr, Gr}, {Hs, Gs}});
  return {a.omega1(0, 1), a.omega2(0, 1), a.omega3(0, 1)};
}

QuadCovEstimate qc_naive(const Functional& H, const Functional& G, const SpotCovPath& path) {
  EstimationContext ctx(path, nullptr);
  return ctx.estimate(H, G, Method::Naive);
}

QuadCovEstimate qc_an(const Functional& H, const Functional& G, const SpotCovPath& path,
                      const VolJumpMask* mask) {
  EstimationContext ctx(path, mask);
  return ctx.estimate(H, G, Method::AN);
}

QuadCovEstimate qc_lin(const Functional& H, const Functional& G, const SpotCovPath& path,
                       const VolJumpMask* mask) {
  EstimationContext ctx(path, mask);
  return ctx.estimate(H, G, Method::LIN);
}

}  // namespace ivdep
