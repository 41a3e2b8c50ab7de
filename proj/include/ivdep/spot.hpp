#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ivdep/config.hpp"
#include "ivdep/panel.hpp"

namespace ivdep {

// (pi/2) sum_{i>=2} |r_i||r_{i-1}| / ((m-1) delta_n)
double bipower_sigma2(std::span<const double> returns, double delta_n);

// u_n(asset, day) = trunc_mult * sigma_day * delta_n^varpi
struct TruncationThresholds {
  int d = 0;
  std::vector<int> day_ids;   // distinct day ids in panel order
  std::vector<double> u;      // day slot * d + asset
  std::vector<int> slot_of_increment;

  double at(int asset, int slot) const { return u[static_cast<std::size_t>(slot) * d + asset]; }
};

TruncationThresholds compute_thresholds(const ReturnPanel& panel, const EstimatorConfig& cfg);

// Spot covariance estimates at window starts p = 0..L-1 (L = n - k_n + 1);
// window p covers increments p..p+k_n-1.
class SpotCovPath {
 public:
  SpotCovPath() = default;
  SpotCovPath(int d, int k_n, double delta_n, std::vector<double> values,
              std::vector<int> trunc_hits = {}, std::vector<std::uint8_t> crosses_day = {});

  std::size_t size() const { return d_ == 0 ? 0 : values_.size() / (static_cast<std::size_t>(d_) * d_); }
  std::size_t n_increments() const { return size() + k_n_ - 1; }
  int d() const { return d_; }
  int k_n() const { return k_n_; }
  double delta_n() const { return delta_n_; }

  const double* data(std::size_t p) const { return values_.data() + p * d_ * d_; }
  Eigen::Map<const Eigen::MatrixXd> at(std::size_t p) const { return {data(p), d_, d_}; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<int>& trunc_hits() const { return trunc_hits_; }
  bool crosses_day(std::size_t p) const { return !crosses_day_.empty() && crosses_day_[p] != 0; }

 private:
  int d_ = 0;
  int k_n_ = 0;
  double delta_n_ = 0.0;
  std::vector<double> values_;
  std::vector<int> trunc_hits_;
  std::vector<std::uint8_t> crosses_day_;
};

SpotCovPath estimate_spot_path(const ReturnPanel& panel, const EstimatorConfig& cfg);

// A_p for window starts p; -1 undefined, 0 jump detected, 1 no jump.
class VolJumpMask {
 public:
  VolJumpMask() = default;
  VolJumpMask(std::vector<std::int8_t> state, int k_n) : state_(std::move(state)), k_n_(k_n) {}

  static VolJumpMask constant(std::size_t length, int k_n, bool value);

  std::size_t size() const { return state_.size(); }
  int k_n() const { return k_n_; }
  std::int8_t state(std::size_t p) const { return p < state_.size() ? state_[p] : std::int8_t(-1); }
  bool defined(std::size_t p) const { return state(p) >= 0; }
  bool ok(std::size_t p) const { return state(p) == 1; }
  std::size_t count_jumps() const;
  std::size_t count_defined() const;

 private:
  std::vector<std::int8_t> state_;
  int k_n_ = 0;
};

VolJumpMask detect_vol_jump_events(const SpotCovPath& path, const EstimatorConfig& cfg);

// Mask handed to the estimators: the jump rule when vol_trunc_enabled, only
// the day-straddling exclusion when that alone is configured, else nothing.
std::optional<VolJumpMask> estimation_mask(const SpotCovPath& path, const EstimatorConfig& cfg);

}  // namespace ivdep
