#include "ivdep/avar.hpp"

#include <cmath>

#include "ivdep/error.hpp"
#include "ivdep/summation.hpp"

namespace ivdep {

bool AvarMatrix::any_negative_diagonal() const {
  for (bool b : negative_diagonal)
    if (b) return true;
  return false;
}

bool AvarMatrix::psd(double rel_tol) const {
  if (sigma.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  double tr = sigma.trace();
  return es.eigenvalues().minCoeff() >= -rel_tol * std::abs(tr);
}

double sigma_entry(const OmegaTerms& w, double theta) {
  const double t = theta;
  double s1 = 6.0 / (t * t * t) * w.omega1;
  // The spot-noise bias of omega3 is (6/theta^2) omega1; a 6/theta factor
  // leaves a residual bias unless theta = 1.
  double s3 = 3.0 / (2.0 * t) * (w.omega3 - 6.0 / (t * t) * w.omega1);
  double s2 = 151.0 * t / 140.0 * (9.0 / (4.0 * t * t)) *
              (w.omega2 + 4.0 / (t * t) * w.omega1 - 4.0 / 3.0 * w.omega3);
  return s1 + s3 + s2;
}

AvarMatrix EstimationContext::avar(const std::vector<FunctionalPair>& pairs) {
  const std::size_t kappa = pairs.size();
  if (kappa == 0) throw Error(ErrorCode::DimensionMismatch, "need at least one pair");
  const std::size_t k = path_.k_n();
  const std::size_t L = path_.size();
  check_length(5 * k + 1, "asymptotic variance");

  // distinct functionals and where each pair points into them
  std::vector<const GradientSeries*> uniq;
  std::vector<std::uint64_t> ids;
  auto slot = [&](const Functional& f) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == f.id()) return i;
    ids.push_back(f.id());
    uniq.push_back(&series(f));
    return ids.size() - 1;
  };
  std::vector<std::size_t> hi(kappa), gi(kappa);
  for (std::size_t r = 0; r < kappa; ++r) {
    hi[r] = slot(pairs[r].h);
    gi[r] = slot(pairs[r].g);
  }
  const std::size_t u = uniq.size();

  const double dn = path_.delta_n();
  const double kk = static_cast<double>(k);
  std::vector<PairwiseSum> s1(kappa * kappa), s2(kappa * kappa), s3(kappa * kappa);
  std::vector<double> l(u), lp(u), M(u * u);

  for (std::size_t p = k; p + 4 * k < L; ++p) {
    bool on = indicator(p, 4);
    if (on) {
      for (std::size_t a = 0; a < u; ++a) {
        l[a] = ell(*uniq[a], p, p);
        lp[a] = ell(*uniq[a], p, p + 2 * k);
      }
      for (std::size_t a = 0; a < u; ++a)
        for (std::size_t b = a; b < u; ++b) M[a * u + b] = M[b * u + a] = m_term(*uniq[a], *uniq[b], p);
    }
    for (std::size_t r = 0; r < kappa; ++r) {
      for (std::size_t s = 0; s < kappa; ++s) {
        const std::size_t e = r * kappa + s;
        if (!on) {
          s1[e].add(0.0);
          s2[e].add(0.0);
          s3[e].add(0.0);
          continue;
        }
        const std::size_t Hr = hi[r], Gr = gi[r], Hs = hi[s], Gs = gi[s];
        auto m = [&](std::size_t x, std::size_t y) { return M[x * u + y]; };
        s1[e].add(dn * (m(Hr, Hs) * m(Gr, Gs) + m(Gr, Hs) * m(Hr, Gs)));
        s2[e].add(0.5 * (l[Hr] * l[Hs] * lp[Gr] * lp[Gs] + l[Gr] * l[Gs] * lp[Hr] * lp[Hs] +
                         l[Gr] * l[Hs] * lp[Hr] * lp[Gs] + l[Hr] * l[Gs] * lp[Gr] * lp[Hs]));
        s3[e].add(3.0 / (2.0 * kk) *
                  (m(Hr, Hs) * l[Gr] * l[Gs] + m(Gr, Gs) * l[Hr] * l[Hs] + m(Hr, Gs) * l[Gr] * l[Hs] +
                   m(Gr, Hs) * l[Hr] * l[Gs]));
      }
    }
  }

  AvarMatrix out;
  out.theta = kk * std::sqrt(dn);
  out.delta_n = dn;
  const int K = static_cast<int>(kappa);
  out.omega1.resize(K, K);
  out.omega2.resize(K, K);
  out.omega3.resize(K, K);
  out.sigma.resize(K, K);
  Eigen::MatrixXd raw(K, K);
  for (int r = 0; r < K; ++r) {
    for (int s = 0; s < K; ++s) {
      const std::size_t e = r * kappa + s;
      OmegaTerms w{s1[e].result(), s2[e].result(), s3[e].result()};
      out.omega1(r, s) = w.omega1;
      out.omega2(r, s) = w.omega2;
      out.omega3(r, s) = w.omega3;
      raw(r, s) = sigma_entry(w, out.theta);
    }
  }
  out.sigma = 0.5 * (raw + raw.transpose());
  out.omega1 = 0.5 * (out.omega1 + out.omega1.transpose()).eval();
  out.omega2 = 0.5 * (out.omega2 + out.omega2.transpose()).eval();
  out.omega3 = 0.5 * (out.omega3 + out.omega3.transpose()).eval();
  out.negative_diagonal.resize(kappa);
  for (int r = 0; r < K; ++r) out.negative_diagonal[r] = out.sigma(r, r) < 0.0;
  return out;
}

OmegaTerms omega_terms(const Functional& Hr, const Functional& Gr, const Functional& Hs,
                       const Functional& Gs, const SpotCovPath& path, const VolJumpMask* mask) {
  EstimationContext ctx(path, mask);
  return ctx.omega(Hr, Gr, Hs, Gs);
}

AvarMatrix sigma_matrix(const std::vector<FunctionalPair>& pairs, const SpotCovPath& path,
                        const VolJumpMask* mask) {
  EstimationContext ctx(path, mask);
  return ctx.avar(pairs);
}

double delta_method_var(const Eigen::VectorXd& g, const Eigen::MatrixXd& sigma) {
  if (g.size() != sigma.rows() || sigma.rows() != sigma.cols())
    throw Error(ErrorCode::DimensionMismatch, "gradient length differs from covariance size");
  return g.dot(sigma * g);
}

double delta_method_var(const Eigen::VectorXd& g, const AvarMatrix& a) { return delta_method_var(g, a.sigma); }

}  // namespace ivdep
