#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ivdep {

// How A_i (no volatility jump between windows i-k and i+k) is decided.
//   VolatilityPoints  per-asset |sqrt(C_gg(i+k)) - sqrt(C_gg(i-k))| < vol_jump_abs
//   DiagonalVariance  per-asset |C_gg(i+k) - C_gg(i-k)| < vol_jump_abs
//   Frobenius         ||C(i+k) - C(i-k)||_F < vol_jump_abs
//   Asymptotic        ||C(i+k) - C(i-k)||_F < delta_n^varpi_prime
enum class VolJumpRule { VolatilityPoints, DiagonalVariance, Frobenius, Asymptotic };

const char* to_string(VolJumpRule r) noexcept;
VolJumpRule vol_jump_rule_from_string(const std::string& s);

struct EstimatorConfig {
  double delta_n = 1.0 / (252.0 * 78.0);
  double theta = 2.5;
  double varpi = 0.49;
  double trunc_mult = 3.0;
  double varpi_prime = 0.1;
  double vol_jump_abs = 0.10;
  VolJumpRule vol_jump_rule = VolJumpRule::VolatilityPoints;
  double r_jump_activity = 0.0;
  bool vol_trunc_enabled = true;
  bool price_trunc_enabled = true;
  bool allow_cross_day_windows = true;

  // ceil(theta / sqrt(delta_n)), guarded against 2.0000000001-style round-up
  int k_n() const;
  // theta actually realised by the integer window
  double theta_eff() const;

  void validate() const;
  // additionally requires k_n >= 2 and 4 k_n < n
  void validate_for(std::size_t n_increments) const;

  std::string fingerprint() const;
};

// flat "key=value" lines; doubles are written shortest-round-trip
std::string to_kv(const EstimatorConfig& cfg);
// '#' comments and blank lines skipped; throws ConfigError on malformed lines
std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& text);
EstimatorConfig config_from_kv(const std::string& text);
// applies a single key; returns false for unknown keys
bool apply_config_key(EstimatorConfig& cfg, const std::string& key, const std::string& value);

std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace ivdep
