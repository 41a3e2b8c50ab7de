#pragma once

#include <string>
#include <vector>

#include "ivdep/config.hpp"
#include "ivdep/panel.hpp"

namespace ivdep {

struct Session {
  int open_seconds = 9 * 3600 + 30 * 60;
  int close_seconds = 16 * 3600;
  int days_per_year = 252;
  int utc_offset_minutes = 0;  // applied to timestamps carrying Z or an explicit offset
};

struct Tick {
  long long day = 0;   // days since 1970-01-01 in exchange time
  double seconds = 0;  // seconds after midnight
  double price = 0;
};

struct TickSeries {
  std::string label;
  std::vector<Tick> ticks;
};

// ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM]"
Tick parse_timestamp(const std::string& s, const Session& session);

TickSeries read_tick_csv(const std::string& path, const std::string& label, const Session& session);
TickSeries parse_tick_csv(const std::string& text, const std::string& label, const Session& session);

// Previous-tick sampling on open, open+step, ..., close; duplicate stamps
// collapse to their median; days missing for any asset are dropped; each
// day is shifted to start at the previous day's close so no overnight
// increment enters the panel. The last factor_count series are the factors.
ReturnPanel resample(const std::vector<TickSeries>& series, int step_seconds, const Session& session,
                     int factor_count);
ReturnPanel load_and_resample(const std::vector<std::string>& files, const std::vector<std::string>& labels,
                              int step_seconds, const Session& session, int factor_count);

std::string panel_to_csv(const ReturnPanel& p);
ReturnPanel panel_from_csv(const std::string& text);
void write_panel_csv(const std::string& path, const ReturnPanel& p);
ReturnPanel read_panel_csv(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

EstimatorConfig read_config_file(const std::string& path);

}  // namespace ivdep
