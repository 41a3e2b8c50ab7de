#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace ivdep {

// Streaming pairwise (cascade) summation. The result depends only on the
// order of add() calls, so sequential reductions are bit-reproducible.
class PairwiseSum {
 public:
  void add(double x) {
    block_[fill_++] = x;
    if (fill_ == kBlock) flush();
  }

  double result() const {
    double tail = 0.0;
    for (std::size_t i = 0; i < fill_; ++i) tail += block_[i];
    double s = 0.0;
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) s += it->value;
    return s + tail;
  }

  std::size_t count() const { return total_ + fill_; }

 private:
  static constexpr std::size_t kBlock = 32;
  struct Level {
    double value;
    int level;
  };

  void flush() {
    double s = 0.0;
    for (std::size_t i = 0; i < kBlock; ++i) s += block_[i];
    total_ += kBlock;
    fill_ = 0;
    Level cur{s, 0};
    while (!stack_.empty() && stack_.back().level == cur.level) {
      cur.value = stack_.back().value + cur.value;
      ++cur.level;
      stack_.pop_back();
    }
    stack_.push_back(cur);
  }

  std::array<double, kBlock> block_{};
  std::size_t fill_ = 0;
  std::size_t total_ = 0;
  std::vector<Level> stack_;
};

template <class Range>
double pairwise_sum(const Range& r) {
  PairwiseSum s;
  for (double x : r) s.add(x);
  return s.result();
}

}  // namespace ivdep
