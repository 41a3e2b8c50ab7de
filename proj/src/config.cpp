#include "ivdep/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "ivdep/error.hpp"

namespace ivdep {

const char* to_string(VolJumpRule r) noexcept {
  switch (r) {
    case VolJumpRule::VolatilityPoints: return "volatility_points";
    case VolJumpRule::DiagonalVariance: return "diagonal_variance";
    case VolJumpRule::Frobenius: return "frobenius";
    case VolJumpRule::Asymptotic: return "asymptotic";
  }
  return "?";
}

VolJumpRule vol_jump_rule_from_string(const std::string& s) {
  if (s == "volatility_points") return VolJumpRule::VolatilityPoints;
  if (s == "diagonal_variance") return VolJumpRule::DiagonalVariance;
  if (s == "frobenius") return VolJumpRule::Frobenius;
  if (s == "asymptotic") return VolJumpRule::Asymptotic;
  throw Error(ErrorCode::ConfigError, "unknown vol_jump_rule '" + s + "'");
}

int EstimatorConfig::k_n() const {
  double raw = theta / std::sqrt(delta_n);
  double r = std::round(raw);
  if (std::abs(raw - r) < 1e-9 * std::max(1.0, raw)) return static_cast<int>(r);
  return static_cast<int>(std::ceil(raw));
}

double EstimatorConfig::theta_eff() const { return k_n() * std::sqrt(delta_n); }

void EstimatorConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (!(delta_n > 0.0) || !std::isfinite(delta_n)) fail("delta_n must be positive");
  if (!(theta > 0.0) || !std::isfinite(theta)) fail("theta must be positive");
  if (!(varpi > 0.0 && varpi < 0.5)) fail("varpi must lie in (0, 0.5)");
  if (!(trunc_mult > 0.0)) fail("trunc_mult must be positive");
  if (!(r_jump_activity >= 0.0 && r_jump_activity < 0.5)) fail("r_jump_activity must lie in [0, 0.5)");
  if (!(vol_jump_abs > 0.0)) fail("vol_jump_abs must be positive");
  if (vol_trunc_enabled) {
    double cap = std::min(0.5 - r_jump_activity, 0.125);
    if (!(varpi_prime > 0.0 && varpi_prime < cap)) fail("varpi_prime must lie in (0, min(1/2 - r, 1/8))");
    double lo = (2.0 * varpi_prime + 9.0) / (4.0 * (5.0 - r_jump_activity));
    if (!(varpi > lo)) fail("varpi too small for the window condition with volatility truncation");
  }
}

void EstimatorConfig::validate_for(std::size_t n) const {
  validate();
  int k = k_n();
  if (k < 2) throw Error(ErrorCode::ConfigError, "k_n must be at least 2");
  if (4 * static_cast<std::size_t>(k) >= n)
    throw Error(ErrorCode::PanelTooShort, "need 4 k_n < n (k_n=" + std::to_string(k) +
                                              ", n=" + std::to_string(n) + ")");
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  if (b < e && *b == '+') ++b;
  auto res = std::from_chars(b, e, x);
  if (res.ec != std::errc() || res.ptr != e)
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  return x;
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::ConfigError, "not a boolean: '" + v + "'");
}

}  // namespace

std::string to_kv(const EstimatorConfig& c) {
  std::ostringstream os;
  os << "delta_n=" << format_double(c.delta_n) << '\n'
     << "theta=" << format_double(c.theta) << '\n'
     << "varpi=" << format_double(c.varpi) << '\n'
     << "trunc_mult=" << format_double(c.trunc_mult) << '\n'
     << "varpi_prime=" << format_double(c.varpi_prime) << '\n'
     << "vol_jump_abs=" << format_double(c.vol_jump_abs) << '\n'
     << "vol_jump_rule=" << to_string(c.vol_jump_rule) << '\n'
     << "r_jump_activity=" << format_double(c.r_jump_activity) << '\n'
     << "vol_trunc_enabled=" << (c.vol_trunc_enabled ? "true" : "false") << '\n'
     << "price_trunc_enabled=" << (c.price_trunc_enabled ? "true" : "false") << '\n'
     << "allow_cross_day_windows=" << (c.allow_cross_day_windows ? "true" : "false") << '\n';
  return os.str();
}

bool apply_config_key(EstimatorConfig& c, const std::string& k, const std::string& v) {
  if (k == "delta_n") c.delta_n = parse_double(v);
  else if (k == "theta") c.theta = parse_double(v);
  else if (k == "varpi") c.varpi = parse_double(v);
  else if (k == "trunc_mult") c.trunc_mult = parse_double(v);
  else if (k == "varpi_prime") c.varpi_prime = parse_double(v);
  else if (k == "vol_jump_abs") c.vol_jump_abs = parse_double(v);
  else if (k == "vol_jump_rule") c.vol_jump_rule = vol_jump_rule_from_string(v);
  else if (k == "r_jump_activity") c.r_jump_activity = parse_double(v);
  else if (k == "vol_trunc_enabled") c.vol_trunc_enabled = parse_bool(v);
  else if (k == "price_trunc_enabled") c.price_trunc_enabled = parse_bool(v);
  else if (k == "allow_cross_day_windows") c.allow_cross_day_windows = parse_bool(v);
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(first, eq - first);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string val = line.substr(eq + 1);
    auto vb = val.find_first_not_of(" \t");
    val = vb == std::string::npos ? "" : val.substr(vb);
    while (!val.empty() && (val.back() == ' ' || val.back() == '\t')) val.pop_back();
    out.emplace_back(key, val);
  }
  return out;
}

EstimatorConfig config_from_kv(const std::string& text) {
  EstimatorConfig c;
  for (const auto& [key, val] : parse_kv(text))
    if (!apply_config_key(c, key, val)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
  return c;
}

std::string EstimatorConfig::fingerprint() const {
  // FNV-1a over the canonical key/value text
  std::string s = to_kv(*this);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xF];
    h >>= 4;
  }
  buf[16] = 0;
  return buf;
}

}  // namespace ivdep
