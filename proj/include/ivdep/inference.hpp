#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ivdep {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;  // Wald only
  double standard_error = 0.0;
  bool valid = true;
  std::string note;  // why the result is invalid
};

// stat = delta_n^{-1/4} est / sqrt(avar); two-sided normal p-value unless one_sided
// (upper tail). Invalid (NaN p) when avar <= 0 or not finite.
TestResult t_test_quadcov(double estimate, double avar, double delta_n, bool one_sided = false);

// stat = delta_n^{-1/2} v' Sigma^{-1} v against chi-square(dim v)
TestResult wald_test(const Eigen::VectorXd& v, const Eigen::MatrixXd& sigma, double delta_n);

enum class FdrProcedure { BH, BY };

struct FdrResult {
  std::vector<bool> reject;
  std::vector<std::size_t> excluded;  // NaN or out-of-range p-values
  double threshold = 0.0;             // largest rejected p-value (0 if none)
};

FdrResult fdr_bh(const std::vector<double>& p_values, double q, FdrProcedure proc = FdrProcedure::BH);

double normal_two_sided_p(double z);
double chi2_upper_p(double x, int dof);

}  // namespace ivdep
