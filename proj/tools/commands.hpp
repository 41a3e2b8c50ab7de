#pragma once

#include <CLI11.hpp>

#include <map>
#include <string>
#include <vector>

#include "ivdep/config.hpp"

namespace ivdep::cli {

// Exit codes
constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitFlagged = 5;  // finished, but some results carry numeric-validity flags

// Command-line options that double as config-file keys. A flag --foo-bar is
// the key foo_bar. Keys from --config win over flags, with a warning.
class Options {
 public:
  explicit Options(CLI::App* app);

  void value(const std::string& key, const std::string& help);
  void flag(const std::string& key, const std::string& help);
  void estimator_keys();

  void resolve();

  bool has(const std::string& key) const { return merged_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& def = {}) const;
  std::string required(const std::string& key) const;
  double num(const std::string& key, double def) const;
  long long integer(const std::string& key, long long def) const;
  bool boolean(const std::string& key, bool def = false) const;
  std::vector<std::string> list(const std::string& key) const;

  // estimator keys applied on top of base
  EstimatorConfig estimator(EstimatorConfig base = {}) const;

 private:
  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> flags_;
  std::map<std::string, CLI::Option*> opts_;
  std::map<std::string, std::string> merged_;
};

// panel or tick-file input
void input_keys(Options& o);

int run_simulate(const Options& o);
int run_estimate(const Options& o, bool with_tests);
int run_report(const Options& o);
int run_mc(const Options& o);

}  // namespace ivdep::cli
