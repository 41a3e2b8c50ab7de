#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ivdep/quadcov.hpp"

namespace ivdep {

struct AvarMatrix {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd omega1, omega2, omega3;
  double theta = 0.0;
  double delta_n = 0.0;
  std::vector<bool> negative_diagonal;

  bool any_negative_diagonal() const;
  // smallest eigenvalue >= -rel_tol * trace
  bool psd(double rel_tol = 1e-6) const;
};

OmegaTerms omega_terms(const Functional& Hr, const Functional& Gr, const Functional& Hs,
                       const Functional& Gs, const SpotCovPath& path, const VolJumpMask* mask);

double sigma_entry(const OmegaTerms& w, double theta);

// theta is taken from the realised window, k_n * sqrt(delta_n)
AvarMatrix sigma_matrix(const std::vector<FunctionalPair>& pairs, const SpotCovPath& path,
                        const VolJumpMask* mask);

double delta_method_var(const Eigen::VectorXd& g, const AvarMatrix& a);
double delta_method_var(const Eigen::VectorXd& g, const Eigen::MatrixXd& sigma);

}  // namespace ivdep
