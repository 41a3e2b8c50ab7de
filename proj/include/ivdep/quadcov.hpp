#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ivdep/functional.hpp"
#include "ivdep/spot.hpp"

namespace ivdep {

enum class Method { Naive, AN, LIN };
const char* to_string(Method m) noexcept;
Method method_from_string(const std::string& s);

struct QuadCovEstimate {
  double value = 0.0;
  Method method = Method::LIN;
  std::string pair_id;
  std::string config_fingerprint;
  std::size_t summand_count = 0;  // length of the summation range
  std::size_t active_count = 0;   // summands surviving the A-indicator
  bool negative_flag = false;     // H == G and the estimate came out negative
};

// AN split into the 3/2-scaled raw product sum and the additive correction:
// value = 1.5 * raw + correction.
struct AnParts {
  double raw = 0.0;
  double correction = 0.0;
  double value() const { return 1.5 * raw + correction; }
};

// Values and sparse gradients of one functional along the spot path.
struct GradientSeries {
  std::vector<int> support;     // flat indices a*d+b
  std::vector<int> row, col;    // split support
  std::vector<double> value;    // L
  std::vector<double> grad;     // L * support.size()

  std::size_t nnz() const { return support.size(); }
  const double* g(std::size_t p) const { return grad.data() + p * support.size(); }
};

GradientSeries compute_series(const Functional& f, const SpotCovPath& path);

struct FunctionalPair {
  Functional h, g;
};

struct OmegaTerms {
  double omega1 = 0.0, omega2 = 0.0, omega3 = 0.0;
};

struct AvarMatrix;

// Per-panel estimation workspace: caches gradient series by functional id.
// Not thread-safe; use one per worker.
class EstimationContext {
 public:
  EstimationContext(const SpotCovPath& path, const VolJumpMask* mask, std::string fingerprint = {});

  const SpotCovPath& path() const { return path_; }
  const VolJumpMask* mask() const { return mask_; }
  const std::string& fingerprint() const { return fingerprint_; }

  const GradientSeries& series(const Functional& f);

  QuadCovEstimate estimate(const Functional& H, const Functional& G, Method m);
  AnParts an_parts(const Functional& H, const Functional& G);

  // scalar building blocks at window start p
  double ell(const GradientSeries& s, std::size_t p, std::size_t lambda_at) const;
  double m_term(const GradientSeries& P, const GradientSeries& Q, std::size_t p) const;

  OmegaTerms omega(const Functional& Hr, const Functional& Gr, const Functional& Hs, const Functional& Gs);
  AvarMatrix avar(const std::vector<FunctionalPair>& pairs);

 private:
  bool indicator(std::size_t p, int span) const;
  void check_length(std::size_t needed_windows, const char* what) const;

  const SpotCovPath& path_;
  const VolJumpMask* mask_;
  std::string fingerprint_;
  std::map<std::uint64_t, std::unique_ptr<GradientSeries>> cache_;
};

QuadCovEstimate qc_naive(const Functional& H, const Functional& G, const SpotCovPath& path);
QuadCovEstimate qc_an(const Functional& H, const Functional& G, const SpotCovPath& path,
                      const VolJumpMask* mask);
QuadCovEstimate qc_lin(const Functional& H, const Functional& G, const SpotCovPath& path,
                       const VolJumpMask* mask);

}  // namespace ivdep
