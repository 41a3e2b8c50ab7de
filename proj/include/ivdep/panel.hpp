#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ivdep {

// Synchronised log-price grid. Row i holds the d log prices at observation i
// (i = 0..n); the last factor_count columns are the return factors.
// Increment i runs from observation i to i+1 and belongs to the day of its
// end observation.
struct ReturnPanel {
  std::vector<std::string> labels;
  std::vector<double> log_prices;  // (n+1) x d, row-major
  double delta_n = 0.0;
  std::vector<int> day_index;  // n+1 entries, nondecreasing
  int factor_count = 0;

  std::size_t d() const { return labels.size(); }
  std::size_t n() const { return d() == 0 ? 0 : log_prices.size() / d() - 1; }
  int stock_count() const { return static_cast<int>(d()) - factor_count; }

  double price(std::size_t obs, std::size_t a) const { return log_prices[obs * d() + a]; }
  double increment(std::size_t i, std::size_t a) const {
    return log_prices[(i + 1) * d() + a] - log_prices[i * d() + a];
  }
  int increment_day(std::size_t i) const { return day_index[i + 1]; }

  // throws DimensionMismatch / DomainError on a malformed grid
  void validate() const;

  // Column subset; factor_count tells how many of the trailing selected columns are factors.
  ReturnPanel select(const std::vector<int>& columns, int new_factor_count) const;
};

}  // namespace ivdep
