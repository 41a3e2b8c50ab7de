#include "ivdep/panel.hpp"

#include <cmath>

#include "ivdep/error.hpp"

namespace ivdep {

void ReturnPanel::validate() const {
  std::size_t dd = d();
  if (dd == 0) throw Error(ErrorCode::DimensionMismatch, "panel has no columns");
  if (log_prices.size() % dd != 0 || log_prices.size() < dd)
    throw Error(ErrorCode::DimensionMismatch, "log_prices is not an (n+1) x d grid");
  if (day_index.size() != n() + 1)
    throw Error(ErrorCode::DimensionMismatch, "day_index length differs from observation count");
  if (factor_count < 0 || static_cast<std::size_t>(factor_count) > dd)
    throw Error(ErrorCode::DimensionMismatch, "factor_count out of range");
  if (!(delta_n > 0.0)) throw Error(ErrorCode::DomainError, "delta_n must be positive");
  for (double x : log_prices)
    if (!std::isfinite(x)) throw Error(ErrorCode::DomainError, "non-finite log price");
  for (std::size_t i = 1; i < day_index.size(); ++i)
    if (day_index[i] < day_index[i - 1])
      throw Error(ErrorCode::NonmonotoneTimestamps, "day_index decreases");
}

ReturnPanel ReturnPanel::select(const std::vector<int>& columns, int new_factor_count) const {
  ReturnPanel out;
  std::size_t dd = d();
  for (int c : columns) {
    if (c < 0 || static_cast<std::size_t>(c) >= dd)
      throw Error(ErrorCode::DimensionMismatch, "column index out of range");
    out.labels.push_back(labels[c]);
  }
  if (new_factor_count < 0 || static_cast<std::size_t>(new_factor_count) > columns.size())
    throw Error(ErrorCode::DimensionMismatch, "factor_count out of range");
  std::size_t rows = n() + 1;
  out.log_prices.resize(rows * columns.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < columns.size(); ++j)
      out.log_prices[r * columns.size() + j] = log_prices[r * dd + columns[j]];
  out.delta_n = delta_n;
  out.day_index = day_index;
  out.factor_count = new_factor_count;
  return out;
}

}  // namespace ivdep
