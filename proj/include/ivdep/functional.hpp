#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ivdep {

namespace detail {
struct Node;
}

enum class ComposeOp { Add, Sub, Mul, Div };

// Smooth scalar map H(C) of a d x d matrix with its analytic gradient.
// All d^2 entries are independent arguments; flat index of C_ab is a*d + b.
// Indices are 0-based throughout.
class Functional {
 public:
  Functional() = default;

  static Functional entry(int d, int a, int b);
  static Functional constant(int d, double c);
  // C_jj - C_{j,F} C_FF^{-1} C_{F,j}
  static Functional idiovol(int d, int j, std::vector<int> factors);
  // k-th component of C_FF^{-1} C_{F,j}
  static Functional beta(int d, int j, int k, std::vector<int> factors);

  Functional operator+(const Functional& o) const;
  Functional operator-(const Functional& o) const;
  Functional operator*(const Functional& o) const;
  Functional operator/(const Functional& o) const;
  Functional scale(double s) const;

  // Checked: C must be d x d and symmetric (DomainError otherwise).
  double value(const Eigen::MatrixXd& C) const;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& C) const;

  // Unchecked: C is a row-major d*d buffer taken exactly as given; grad
  // (optional, d*d) is overwritten with all partials.
  double evaluate(const double* C, double* grad) const;

  // flat indices of entries with a possibly nonzero partial, ascending
  const std::vector<int>& support() const;
  bool is_linear() const;
  int dim() const;
  const std::string& name() const;
  // unique per constructed expression; copies share it
  std::uint64_t id() const;
  bool valid() const { return static_cast<bool>(node_); }

 private:
  friend Functional compose(ComposeOp, const Functional&, const Functional&);
  explicit Functional(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

Functional compose(ComposeOp op, const Functional& lhs, const Functional& rhs);
Functional compose(ComposeOp op, const Functional& lhs, double rhs);

}  // namespace ivdep
