#include "ivdep/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ivdep/error.hpp"

namespace ivdep {

namespace {

// days since 1970-01-01 for a proleptic Gregorian date
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

int digits(const std::string& s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) throw Error(ErrorCode::ParseError, "timestamp too short: '" + s + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') throw Error(ErrorCode::ParseError, "bad timestamp: '" + s + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = s.find_first_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b);
}

}  // namespace

Tick parse_timestamp(const std::string& raw, const Session& session) {
  std::string s = trim(raw);
  Tick t;
  int Y = digits(s, 0, 4), M = digits(s, 5, 2), D = digits(s, 8, 2);
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    throw Error(ErrorCode::ParseError, "bad timestamp: '" + s + "'");
  if (M < 1 || M > 12 || D < 1 || D > 31) throw Error(ErrorCode::ParseError, "bad date: '" + s + "'");
  int h = digits(s, 11, 2), mi = digits(s, 14, 2), se = digits(s, 17, 2);
  double frac = 0.0;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    std::size_t e = pos + 1;
    while (e < s.size() && s[e] >= '0' && s[e] <= '9') ++e;
    frac = parse_double("0" + s.substr(pos, e - pos));
    pos = e;
  }
  double secs = h * 3600.0 + mi * 60.0 + se + frac;
  long long day = days_from_civil(Y, static_cast<unsigned>(M), static_cast<unsigned>(D));
  if (pos < s.size()) {
    int off = 0;
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      off = 0;
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      off = digits(s, pos + 1, 2) * 60 + digits(s, pos + 4, 2);
      if (s[pos] == '-') off = -off;
    } else {
      throw Error(ErrorCode::ParseError, "bad timestamp suffix: '" + s + "'");
    }
    // to UTC, then to exchange time
    secs += (session.utc_offset_minutes - off) * 60.0;
    while (secs < 0) {
      secs += 86400.0;
      --day;
    }
    while (secs >= 86400.0) {
      secs -= 86400.0;
      ++day;
    }
  }
  t.day = day;
  t.seconds = secs;
  return t;
}

TickSeries parse_tick_csv(const std::string& text, const std::string& label, const Session& session) {
  TickSeries ts;
  ts.label = label;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("timestamp", 0) == 0) continue;
    }
    auto f = split(line, ',');
    if (f.size() != 2) throw Error(ErrorCode::ParseError, label + " line " + std::to_string(lineno) + ": expected timestamp,price");
    Tick t = parse_timestamp(f[0], session);
    t.price = parse_double(f[1]);
    if (!(t.price > 0.0)) throw Error(ErrorCode::ParseError, label + " line " + std::to_string(lineno) + ": price must be positive");
    if (!ts.ticks.empty()) {
      const Tick& p = ts.ticks.back();
      if (t.day < p.day || (t.day == p.day && t.seconds < p.seconds))
        throw Error(ErrorCode::NonmonotoneTimestamps, label + " line " + std::to_string(lineno));
    }
    ts.ticks.push_back(t);
  }
  return ts;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

TickSeries read_tick_csv(const std::string& path, const std::string& label, const Session& session) {
  return parse_tick_csv(read_file(path), label, session);
}

ReturnPanel resample(const std::vector<TickSeries>& series, int step, const Session& ses, int factor_count) {
  if (series.empty()) throw Error(ErrorCode::DimensionMismatch, "no input series");
  if (step <= 0 || (ses.close_seconds - ses.open_seconds) % step != 0 || ses.close_seconds <= ses.open_seconds)
    throw Error(ErrorCode::ConfigError, "grid step must divide the session length");
  const int B = (ses.close_seconds - ses.open_seconds) / step + 1;
  const std::size_t d = series.size();

  // per asset: day -> in-session ticks with duplicates collapsed to the median
  std::vector<std::map<long long, std::vector<std::pair<double, double>>>> by_day(d);
  for (std::size_t a = 0; a < d; ++a) {
    const auto& ticks = series[a].ticks;
    std::size_t i = 0;
    while (i < ticks.size()) {
      std::size_t j = i;
      std::vector<double> px;
      while (j < ticks.size() && ticks[j].day == ticks[i].day && ticks[j].seconds == ticks[i].seconds) {
        px.push_back(ticks[j].price);
        ++j;
      }
      const Tick& t = ticks[i];
      if (t.seconds >= ses.open_seconds && t.seconds <= ses.close_seconds) {
        std::sort(px.begin(), px.end());
        std::size_t m = px.size();
        double med = m % 2 ? px[m / 2] : 0.5 * (px[m / 2 - 1] + px[m / 2]);
        by_day[a][t.day].push_back({t.seconds, med});
      }
      i = j;
    }
    if (by_day[a].empty()) throw Error(ErrorCode::EmptySession, series[a].label + " has no in-session observations");
  }
  std::set<long long> days;
  for (const auto& kv : by_day[0]) days.insert(kv.first);
  for (std::size_t a = 1; a < d; ++a) {
    std::set<long long> keep;
    for (long long day : days)
      if (by_day[a].count(day)) keep.insert(day);
    days.swap(keep);
  }
  if (days.empty()) throw Error(ErrorCode::EmptySession, "no trading day common to all assets");

  ReturnPanel P;
  for (const auto& s : series) P.labels.push_back(s.label);
  P.factor_count = factor_count;
  P.delta_n = static_cast<double>(step) / (static_cast<double>(ses.close_seconds - ses.open_seconds) * ses.days_per_year);
  std::vector<double> last(d, 0.0);
  int day_no = 0;
  for (long long day : days) {
    std::vector<std::vector<double>> grid(d, std::vector<double>(B));
    for (std::size_t a = 0; a < d; ++a) {
      const auto& tk = by_day[a].at(day);
      std::size_t ptr = 0;
      double cur = std::log(tk.front().second);  // backfill before the first tick
      for (int g = 0; g < B; ++g) {
        double gt = ses.open_seconds + static_cast<double>(g) * step;
        while (ptr < tk.size() && tk[ptr].first <= gt) {
          cur = std::log(tk[ptr].second);
          ++ptr;
        }
        grid[a][g] = cur;
      }
    }
    int first_g = day_no == 0 ? 0 : 1;
    for (int g = first_g; g < B; ++g) {
      for (std::size_t a = 0; a < d; ++a) {
        double shift = day_no == 0 ? 0.0 : last[a] - grid[a][0];
        P.log_prices.push_back(grid[a][g] + shift);
      }
      P.day_index.push_back(day_no);
    }
    for (std::size_t a = 0; a < d; ++a) last[a] = P.log_prices[P.log_prices.size() - d + a];
    ++day_no;
  }
  P.validate();
  return P;
}

ReturnPanel load_and_resample(const std::vector<std::string>& files, const std::vector<std::string>& labels,
                              int step, const Session& session, int factor_count) {
  if (files.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "one label per file required");
  std::vector<TickSeries> s;
  for (std::size_t i = 0; i < files.size(); ++i) s.push_back(read_tick_csv(files[i], labels[i], session));
  return resample(s, step, session, factor_count);
}

std::string panel_to_csv(const ReturnPanel& p) {
  std::string out = "# delta_n=" + format_double(p.delta_n) + ",factor_count=" + std::to_string(p.factor_count) + "\n";
  out += "day";
  for (const auto& l : p.labels) out += "," + l;
  out += "\n";
  const std::size_t d = p.d();
  for (std::size_t r = 0; r <= p.n(); ++r) {
    out += std::to_string(p.day_index[r]);
    for (std::size_t a = 0; a < d; ++a) out += "," + format_double(p.price(r, a));
    out += "\n";
  }
  return out;
}

ReturnPanel panel_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  ReturnPanel p;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw Error(ErrorCode::ParseError, "missing panel metadata line");
  bool have_dn = false;
  for (const auto& kv : split(trim(line.substr(2)), ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "bad metadata '" + kv + "'");
    std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "delta_n") {
      p.delta_n = parse_double(v);
      have_dn = true;
    } else if (k == "factor_count") {
      p.factor_count = static_cast<int>(parse_double(v));
    }
  }
  if (!have_dn) throw Error(ErrorCode::ParseError, "panel metadata lacks delta_n");
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "missing header");
  auto hdr = split(trim(line), ',');
  if (hdr.size() < 2 || hdr[0] != "day") throw Error(ErrorCode::ParseError, "header must start with 'day'");
  p.labels.assign(hdr.begin() + 1, hdr.end());
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != hdr.size()) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": wrong field count");
    p.day_index.push_back(static_cast<int>(parse_double(f[0])));
    for (std::size_t a = 1; a < f.size(); ++a) p.log_prices.push_back(parse_double(f[a]));
  }
  p.validate();
  return p;
}

void write_panel_csv(const std::string& path, const ReturnPanel& p) { write_file(path, panel_to_csv(p)); }
ReturnPanel read_panel_csv(const std::string& path) { return panel_from_csv(read_file(path)); }

EstimatorConfig read_config_file(const std::string& path) { return config_from_kv(read_file(path)); }

}  // namespace ivdep
