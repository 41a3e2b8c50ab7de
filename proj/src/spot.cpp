#include "ivdep/spot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ivdep/error.hpp"

namespace ivdep {

double bipower_sigma2(std::span<const double> r, double delta_n) {
  const std::size_t m = r.size();
  if (m < 2) throw Error(ErrorCode::TooFewObservations, "bipower variation needs at least two returns");
  double s = 0.0;
  for (std::size_t i = 1; i < m; ++i) s += std::abs(r[i]) * std::abs(r[i - 1]);
  return std::numbers::pi / 2.0 * s / (static_cast<double>(m - 1) * delta_n);
}

TruncationThresholds compute_thresholds(const ReturnPanel& panel, const EstimatorConfig& cfg) {
  const std::size_t n = panel.n();
  const int d = static_cast<int>(panel.d());
  TruncationThresholds th;
  th.d = d;
  th.slot_of_increment.resize(n);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < n; ++i) {
    int day = panel.increment_day(i);
    if (th.day_ids.empty() || th.day_ids.back() != day) {
      th.day_ids.push_back(day);
      starts.push_back(i);
    }
    th.slot_of_increment[i] = static_cast<int>(th.day_ids.size()) - 1;
  }
  starts.push_back(n);
  const double scale = cfg.trunc_mult * std::pow(cfg.delta_n, cfg.varpi);
  th.u.resize(th.day_ids.size() * d);
  std::vector<double> r;
  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    for (int a = 0; a < d; ++a) {
      r.clear();
      for (std::size_t i = starts[s]; i < starts[s + 1]; ++i) r.push_back(panel.increment(i, a));
      double bv = bipower_sigma2(r, cfg.delta_n);
      double u = scale * std::sqrt(bv);
      if (!(u > 0.0) || !std::isfinite(u))
        throw Error(ErrorCode::NonPositiveThreshold,
                    "threshold for asset " + panel.labels[a] + " on day " + std::to_string(th.day_ids[s]) +
                        " is not positive");
      th.u[s * d + a] = u;
    }
  }
  return th;
}

SpotCovPath::SpotCovPath(int d, int k_n, double delta_n, std::vector<double> values,
                         std::vector<int> trunc_hits, std::vector<std::uint8_t> crosses_day)
    : d_(d), k_n_(k_n), delta_n_(delta_n), values_(std::move(values)),
      trunc_hits_(std::move(trunc_hits)), crosses_day_(std::move(crosses_day)) {
  if (d_ < 1 || k_n_ < 1) throw Error(ErrorCode::DimensionMismatch, "bad spot path dimensions");
  if (values_.size() % (static_cast<std::size_t>(d_) * d_) != 0)
    throw Error(ErrorCode::DimensionMismatch, "spot values are not a sequence of d x d matrices");
  if (trunc_hits_.empty()) trunc_hits_.assign(size(), 0);
  if (trunc_hits_.size() != size() || (!crosses_day_.empty() && crosses_day_.size() != size()))
    throw Error(ErrorCode::DimensionMismatch, "per-window metadata length mismatch");
}

SpotCovPath estimate_spot_path(const ReturnPanel& panel, const EstimatorConfig& cfg) {
  panel.validate();
  const std::size_t n = panel.n();
  const int d = static_cast<int>(panel.d());
  const int k = cfg.k_n();
  if (k < 1 || n < static_cast<std::size_t>(k) + 1)
    throw Error(ErrorCode::PanelTooShort, "panel has " + std::to_string(n) + " increments, window is " +
                                              std::to_string(k));
  const std::size_t L = n - k + 1;

  // increments, with truncated ones zeroed as whole vectors
  std::vector<double> x(n * d);
  std::vector<std::uint8_t> dropped(n, 0);
  TruncationThresholds th;
  if (cfg.price_trunc_enabled) th = compute_thresholds(panel, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    bool keep = true;
    for (int a = 0; a < d; ++a) {
      double r = panel.increment(i, a);
      x[i * d + a] = r;
      if (cfg.price_trunc_enabled && std::abs(r) > th.at(a, th.slot_of_increment[i])) keep = false;
    }
    if (!keep) {
      dropped[i] = 1;
      std::fill(x.begin() + i * d, x.begin() + (i + 1) * d, 0.0);
    }
  }

  const int tri = d * (d + 1) / 2;
  std::vector<double> acc(tri, 0.0);
  auto add = [&](std::size_t i, double sign) {
    const double* v = &x[i * d];
    int t = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) acc[t++] += sign * v[a] * v[b];
  };

  std::vector<double> values(L * d * d);
  std::vector<int> hits(L, 0);
  std::vector<std::uint8_t> crosses(L, 0);
  int hit_count = 0;
  const double norm = 1.0 / (k * cfg.delta_n);
  for (std::size_t p = 0; p < L; ++p) {
    if (p % static_cast<std::size_t>(k) == 0) {
      // periodic fresh sum bounds the drift of the running update
      std::fill(acc.begin(), acc.end(), 0.0);
      hit_count = 0;
      for (std::size_t i = p; i < p + k; ++i) {
        add(i, 1.0);
        hit_count += dropped[i];
      }
    } else {
      add(p + k - 1, 1.0);
      add(p - 1, -1.0);
      hit_count += dropped[p + k - 1] - dropped[p - 1];
    }
    double* out = &values[p * d * d];
    int t = 0;
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b) {
        double v = acc[t++] * norm;
        if (a == b && v < 0.0) v = 0.0;
        out[a * d + b] = v;
        out[b * d + a] = v;
      }
    }
    hits[p] = hit_count;
    crosses[p] = panel.increment_day(p) != panel.increment_day(p + k - 1);
  }
  return SpotCovPath(d, k, cfg.delta_n, std::move(values), std::move(hits), std::move(crosses));
}

VolJumpMask VolJumpMask::constant(std::size_t length, int k_n, bool value) {
  std::vector<std::int8_t> s(length, -1);
  for (std::size_t p = k_n; p + k_n < length; ++p) s[p] = value ? 1 : 0;
  return VolJumpMask(std::move(s), k_n);
}

std::size_t VolJumpMask::count_jumps() const {
  return static_cast<std::size_t>(std::count(state_.begin(), state_.end(), std::int8_t(0)));
}

std::size_t VolJumpMask::count_defined() const {
  return static_cast<std::size_t>(std::count_if(state_.begin(), state_.end(), [](std::int8_t v) { return v >= 0; }));
}

namespace {

bool no_jump(const SpotCovPath& path, std::size_t lo, std::size_t hi, const EstimatorConfig& cfg) {
  const int d = path.d();
  const double* A = path.data(hi);
  const double* B = path.data(lo);
  switch (cfg.vol_jump_rule) {
    case VolJumpRule::VolatilityPoints:
      for (int g = 0; g < d; ++g) {
        double diff = std::sqrt(std::max(A[g * d + g], 0.0)) - std::sqrt(std::max(B[g * d + g], 0.0));
        if (!(std::abs(diff) < cfg.vol_jump_abs)) return false;
      }
      return true;
    case VolJumpRule::DiagonalVariance:
      for (int g = 0; g < d; ++g)
        if (!(std::abs(A[g * d + g] - B[g * d + g]) < cfg.vol_jump_abs)) return false;
      return true;
    case VolJumpRule::Frobenius:
    case VolJumpRule::Asymptotic: {
      double s = 0.0;
      for (int t = 0; t < d * d; ++t) s += (A[t] - B[t]) * (A[t] - B[t]);
      double u = cfg.vol_jump_rule == VolJumpRule::Frobenius ? cfg.vol_jump_abs
                                                             : std::pow(cfg.delta_n, cfg.varpi_prime);
      return std::sqrt(s) < u;
    }
  }
  return true;
}

VolJumpMask build_mask(const SpotCovPath& path, const EstimatorConfig& cfg, bool apply_rule) {
  const std::size_t L = path.size();
  const std::size_t k = path.k_n();
  std::vector<std::int8_t> s(L, -1);
  for (std::size_t p = k; p + k < L; ++p) {
    bool ok = !apply_rule || no_jump(path, p - k, p + k, cfg);
    if (ok && !cfg.allow_cross_day_windows)
      ok = !path.crosses_day(p - k) && !path.crosses_day(p) && !path.crosses_day(p + k);
    s[p] = ok ? 1 : 0;
  }
  return VolJumpMask(std::move(s), static_cast<int>(k));
}

}  // namespace

VolJumpMask detect_vol_jump_events(const SpotCovPath& path, const EstimatorConfig& cfg) {
  return build_mask(path, cfg, true);
}

std::optional<VolJumpMask> estimation_mask(const SpotCovPath& path, const EstimatorConfig& cfg) {
  if (cfg.vol_trunc_enabled) return build_mask(path, cfg, true);
  if (!cfg.allow_cross_day_windows) return build_mask(path, cfg, false);
  return std::nullopt;
}

}  // namespace ivdep
