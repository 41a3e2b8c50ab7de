#include "ivdep/inference.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "ivdep/error.hpp"

namespace ivdep {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double chi2_upper_p(double x, int dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

TestResult t_test_quadcov(double est, double avar, double delta_n, bool one_sided) {
  TestResult r;
  if (!std::isfinite(avar) || !(avar > 0.0) || !std::isfinite(est)) {
    r.valid = false;
    r.statistic = r.p_value = r.standard_error = kNaN;
    r.note = "asymptotic variance not positive";
    return r;
  }
  r.standard_error = std::pow(delta_n, 0.25) * std::sqrt(avar);
  r.statistic = std::pow(delta_n, -0.25) * est / std::sqrt(avar);
  r.p_value = one_sided ? 0.5 * std::erfc(r.statistic / std::sqrt(2.0)) : normal_two_sided_p(r.statistic);
  return r;
}

TestResult wald_test(const Eigen::VectorXd& v, const Eigen::MatrixXd& sigma, double delta_n) {
  if (sigma.rows() != v.size() || sigma.cols() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "Wald covariance does not match vector length");
  TestResult r;
  r.dof = static_cast<int>(v.size());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  bool ok = ldlt.info() == Eigen::Success && sigma.allFinite() && v.allFinite();
  if (ok) {
    // reject indefinite or numerically singular covariances
    auto D = ldlt.vectorD();
    double mx = D.cwiseAbs().maxCoeff();
    ok = mx > 0.0 && D.minCoeff() > 1e-14 * mx;
  }
  if (!ok) {
    r.valid = false;
    r.statistic = r.p_value = r.standard_error = kNaN;
    r.note = "SingularSigma";
    return r;
  }
  double q = v.dot(ldlt.solve(v));
  r.statistic = q / std::sqrt(delta_n);
  r.p_value = chi2_upper_p(r.statistic, r.dof);
  r.standard_error = kNaN;
  return r;
}

FdrResult fdr_bh(const std::vector<double>& p, double q, FdrProcedure proc) {
  FdrResult out;
  out.reject.assign(p.size(), false);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isfinite(p[i]) && p[i] >= 0.0 && p[i] <= 1.0)
      idx.push_back(i);
    else
      out.excluded.push_back(i);
  }
  const std::size_t m = idx.size();
  if (m == 0) return out;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  // BY divides q by the harmonic number H_m
  double cm = 1.0;
  if (proc == FdrProcedure::BY) {
    cm = 0.0;
    for (std::size_t i = 1; i <= m; ++i) cm += 1.0 / static_cast<double>(i);
  }
  std::size_t kmax = 0;
  for (std::size_t r = 1; r <= m; ++r)
    if (p[idx[r - 1]] <= static_cast<double>(r) / static_cast<double>(m) * q / cm) kmax = r;
  for (std::size_t r = 0; r < kmax; ++r) out.reject[idx[r]] = true;
  out.threshold = kmax ? p[idx[kmax - 1]] : 0.0;
  return out;
}

}  // namespace ivdep
