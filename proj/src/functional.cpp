#include "ivdep/functional.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include "ivdep/config.hpp"
#include "ivdep/error.hpp"

namespace ivdep {
namespace detail {

enum class Kind { Entry, Constant, IdioVol, Beta, Add, Sub, Mul, Div };

struct Node {
  Kind kind;
  int d = 0;
  int a = 0, b = 0;  // Entry
  double c = 0.0;    // Constant
  int j = 0, k = 0;  // IdioVol / Beta
  std::vector<int> factors;
  std::shared_ptr<const Node> lhs, rhs;
  std::vector<int> support;
  bool linear = false;
  std::string name;
  std::uint64_t id = 0;
};

namespace {

std::uint64_t next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

// w = A^{-1} v and, if wanted, z = A^{-T} u and A^{-1} itself; A_kl = C[F_k, F_l].
struct FactorSolve {
  Eigen::MatrixXd inv;
  Eigen::VectorXd w, z;
};

void solve_factor_block(const Node& n, const double* C, FactorSolve& s, bool need_z) {
  const int d = n.d;
  const int m = static_cast<int>(n.factors.size());
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd v(m), u(m);
  for (int p = 0; p < m; ++p) {
    for (int q = 0; q < m; ++q) A(p, q) = C[n.factors[p] * d + n.factors[q]];
    v(p) = C[n.factors[p] * d + n.j];
    u(p) = C[n.j * d + n.factors[p]];
  }
  if (m == 1) {
    if (A(0, 0) == 0.0 || !std::isfinite(A(0, 0)))
      throw Error(ErrorCode::SingularFactorBlock, "factor variance is zero");
    s.inv.resize(1, 1);
    s.inv(0, 0) = 1.0 / A(0, 0);
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    double rc = lu.rcond();
    if (!(rc > 1e-14)) throw Error(ErrorCode::SingularFactorBlock, "factor block is singular");
    s.inv = lu.inverse();
  }
  s.w = s.inv * v;
  if (need_z) s.z = s.inv.transpose() * u;
}

double eval(const Node& n, const double* C, double* grad) {
  const int d = n.d;
  const int dd = d * d;
  if (grad) std::fill(grad, grad + dd, 0.0);
  switch (n.kind) {
    case Kind::Entry:
      if (grad) grad[n.a * d + n.b] = 1.0;
      return C[n.a * d + n.b];
    case Kind::Constant:
      return n.c;
    case Kind::IdioVol: {
      FactorSolve s;
      solve_factor_block(n, C, s, true);
      const int m = static_cast<int>(n.factors.size());
      double q = 0.0;
      for (int p = 0; p < m; ++p) q += C[n.j * d + n.factors[p]] * s.w(p);
      if (grad) {
        grad[n.j * d + n.j] = 1.0;
        for (int p = 0; p < m; ++p) {
          grad[n.j * d + n.factors[p]] -= s.w(p);
          grad[n.factors[p] * d + n.j] -= s.z(p);
          for (int r = 0; r < m; ++r) grad[n.factors[p] * d + n.factors[r]] += s.z(p) * s.w(r);
        }
      }
      return C[n.j * d + n.j] - q;
    }
    case Kind::Beta: {
      FactorSolve s;
      solve_factor_block(n, C, s, false);
      const int m = static_cast<int>(n.factors.size());
      if (grad) {
        for (int l = 0; l < m; ++l) grad[n.factors[l] * d + n.j] += s.inv(n.k, l);
        for (int p = 0; p < m; ++p)
          for (int r = 0; r < m; ++r)
            grad[n.factors[p] * d + n.factors[r]] -= s.inv(n.k, p) * s.w(r);
      }
      return s.w(n.k);
    }
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div: {
      std::vector<double> gr;
      if (grad) gr.resize(dd);
      double l = eval(*n.lhs, C, grad);
      double r = eval(*n.rhs, C, grad ? gr.data() : nullptr);
      if (n.kind == Kind::Add) {
        if (grad)
          for (int t = 0; t < dd; ++t) grad[t] += gr[t];
        return l + r;
      }
      if (n.kind == Kind::Sub) {
        if (grad)
          for (int t = 0; t < dd; ++t) grad[t] -= gr[t];
        return l - r;
      }
      if (n.kind == Kind::Mul) {
        if (grad)
          for (int t = 0; t < dd; ++t) grad[t] = grad[t] * r + l * gr[t];
        return l * r;
      }
      if (grad) {
        double r2 = r * r;
        for (int t = 0; t < dd; ++t) grad[t] = (grad[t] * r - l * gr[t]) / r2;
      }
      return l / r;
    }
  }
  return 0.0;
}

void check_dim(int d) {
  if (d < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
}

void check_index(int d, int a) {
  if (a < 0 || a >= d) throw Error(ErrorCode::DimensionMismatch, "index outside 0..d-1");
}

std::vector<int> check_factors(int d, int j, std::vector<int> f) {
  if (f.empty()) throw Error(ErrorCode::DimensionMismatch, "need at least one factor column");
  std::set<int> seen;
  for (int x : f) {
    check_index(d, x);
    if (x == j) throw Error(ErrorCode::DimensionMismatch, "stock column listed as a factor");
    if (!seen.insert(x).second) throw Error(ErrorCode::DimensionMismatch, "duplicate factor column");
  }
  return f;
}

std::string factor_list(const std::vector<int>& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + std::to_string(f[i]);
  return s;
}

std::vector<int> merge_support(const std::vector<int>& x, const std::vector<int>& y) {
  std::vector<int> out;
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

}  // namespace
}  // namespace detail

using detail::Kind;
using detail::Node;

Functional Functional::entry(int d, int a, int b) {
  detail::check_dim(d);
  detail::check_index(d, a);
  detail::check_index(d, b);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Entry;
  n->d = d;
  n->a = a;
  n->b = b;
  n->support = {a * d + b};
  n->linear = true;
  n->name = "C[" + std::to_string(a) + "," + std::to_string(b) + "]";
  n->id = detail::next_id();
  return Functional(n);
}

Functional Functional::constant(int d, double c) {
  detail::check_dim(d);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->d = d;
  n->c = c;
  n->linear = true;
  n->name = format_double(c);
  n->id = detail::next_id();
  return Functional(n);
}

Functional Functional::idiovol(int d, int j, std::vector<int> factors) {
  detail::check_dim(d);
  detail::check_index(d, j);
  auto n = std::make_shared<Node>();
  n->kind = Kind::IdioVol;
  n->d = d;
  n->j = j;
  n->factors = detail::check_factors(d, j, std::move(factors));
  std::set<int> sup{j * d + j};
  for (int f : n->factors) {
    sup.insert(j * d + f);
    sup.insert(f * d + j);
    for (int g : n->factors) sup.insert(f * d + g);
  }
  n->support.assign(sup.begin(), sup.end());
  n->name = "idiovol(" + std::to_string(j) + ";" + detail::factor_list(n->factors) + ")";
  n->id = detail::next_id();
  return Functional(n);
}

Functional Functional::beta(int d, int j, int k, std::vector<int> factors) {
  detail::check_dim(d);
  detail::check_index(d, j);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Beta;
  n->d = d;
  n->j = j;
  n->factors = detail::check_factors(d, j, std::move(factors));
  if (k < 0 || k >= static_cast<int>(n->factors.size()))
    throw Error(ErrorCode::DimensionMismatch, "beta component outside factor list");
  n->k = k;
  std::set<int> sup;
  for (int f : n->factors) {
    sup.insert(f * d + j);
    for (int g : n->factors) sup.insert(f * d + g);
  }
  n->support.assign(sup.begin(), sup.end());
  n->name = "beta(" + std::to_string(j) + "," + std::to_string(k) + ";" +
            detail::factor_list(n->factors) + ")";
  n->id = detail::next_id();
  return Functional(n);
}

Functional compose(ComposeOp op, const Functional& lhs, const Functional& rhs) {
  if (!lhs.valid() || !rhs.valid()) throw Error(ErrorCode::DimensionMismatch, "empty functional");
  if (lhs.dim() != rhs.dim())
    throw Error(ErrorCode::DimensionMismatch, "functionals of different dimension");
  auto n = std::make_shared<Node>();
  n->d = lhs.dim();
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  n->support = detail::merge_support(lhs.support(), rhs.support());
  bool lc = n->lhs->kind == Kind::Constant, rc = n->rhs->kind == Kind::Constant;
  const char* sym = "+";
  switch (op) {
    case ComposeOp::Add: n->kind = Kind::Add; n->linear = lhs.is_linear() && rhs.is_linear(); break;
    case ComposeOp::Sub: n->kind = Kind::Sub; n->linear = lhs.is_linear() && rhs.is_linear(); sym = "-"; break;
    case ComposeOp::Mul:
      n->kind = Kind::Mul;
      n->linear = (lc && rhs.is_linear()) || (rc && lhs.is_linear());
      sym = "*";
      break;
    case ComposeOp::Div:
      n->kind = Kind::Div;
      n->linear = rc && lhs.is_linear();
      sym = "/";
      break;
  }
  n->name = "(" + lhs.name() + sym + rhs.name() + ")";
  n->id = detail::next_id();
  return Functional(std::shared_ptr<const Node>(n));
}

Functional compose(ComposeOp op, const Functional& lhs, double rhs) {
  return compose(op, lhs, Functional::constant(lhs.dim(), rhs));
}

Functional Functional::operator+(const Functional& o) const { return compose(ComposeOp::Add, *this, o); }
Functional Functional::operator-(const Functional& o) const { return compose(ComposeOp::Sub, *this, o); }
Functional Functional::operator*(const Functional& o) const { return compose(ComposeOp::Mul, *this, o); }
Functional Functional::operator/(const Functional& o) const { return compose(ComposeOp::Div, *this, o); }
Functional Functional::scale(double s) const { return compose(ComposeOp::Mul, *this, s); }

namespace {

std::vector<double> checked_buffer(const Eigen::MatrixXd& C, int d) {
  if (C.rows() != d || C.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "matrix is not " + std::to_string(d) + "x" + std::to_string(d));
  double scale = C.cwiseAbs().maxCoeff();
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (std::abs(C(a, b) - C(b, a)) > 1e-12 * std::max(1.0, scale))
        throw Error(ErrorCode::DomainError, "matrix is not symmetric");
  if (!C.allFinite()) throw Error(ErrorCode::DomainError, "matrix has non-finite entries");
  std::vector<double> buf(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) buf[a * d + b] = C(a, b);
  return buf;
}

}  // namespace

double Functional::value(const Eigen::MatrixXd& C) const {
  auto buf = checked_buffer(C, dim());
  double v = detail::eval(*node_, buf.data(), nullptr);
  if (node_->kind == Kind::Div && !std::isfinite(v))
    throw Error(ErrorCode::ZeroDenominator, "division by zero in " + name());
  return v;
}

Eigen::MatrixXd Functional::gradient(const Eigen::MatrixXd& C) const {
  const int d = dim();
  auto buf = checked_buffer(C, d);
  std::vector<double> g(static_cast<std::size_t>(d) * d);
  detail::eval(*node_, buf.data(), g.data());
  Eigen::MatrixXd out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out(a, b) = g[a * d + b];
  return out;
}

double Functional::evaluate(const double* C, double* grad) const { return detail::eval(*node_, C, grad); }

const std::vector<int>& Functional::support() const { return node_->support; }
bool Functional::is_linear() const { return node_->linear; }
int Functional::dim() const { return node_->d; }
const std::string& Functional::name() const { return node_->name; }
std::uint64_t Functional::id() const { return node_->id; }

}  // namespace ivdep
