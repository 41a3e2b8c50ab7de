#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "ivdep/functional.hpp"
#include "ivdep/panel.hpp"
#include "ivdep/quadcov.hpp"
#include "ivdep/spot.hpp"

namespace testing_util {

using ivdep::Functional;
using ivdep::SpotCovPath;

inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = z(rng);
  return A * A.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

// central differences, every entry perturbed on its own
inline Eigen::MatrixXd fd_gradient(const Functional& f, const Eigen::MatrixXd& C, double h = 1e-6) {
  const int d = static_cast<int>(C.rows());
  Eigen::MatrixXd g(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      std::vector<double> up(d * d), dn(d * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) up[i * d + j] = dn[i * d + j] = C(i, j);
      up[a * d + b] += h;
      dn[a * d + b] -= h;
      g(a, b) = (f.evaluate(up.data(), nullptr) - f.evaluate(dn.data(), nullptr)) / (2 * h);
    }
  return g;
}

// smooth random SPD path of length L: C_p = A_p A_p' + eps I, A a random walk
inline SpotCovPath random_path(int d, int k, std::size_t L, double dn, std::mt19937_64& rng,
                               double step = 0.05) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d) * 0.3;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) += 0.1 * z(rng);
  std::vector<double> vals;
  vals.reserve(L * d * d);
  for (std::size_t p = 0; p < L; ++p) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) += step * 0.3 * z(rng);
    Eigen::MatrixXd C = A * A.transpose() + 0.05 * Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) vals.push_back(C(i, j));
  }
  return SpotCovPath(d, k, dn, std::move(vals));
}

inline SpotCovPath constant_path(int d, int k, std::size_t L, double dn, const Eigen::MatrixXd& C) {
  std::vector<double> vals;
  for (std::size_t p = 0; p < L; ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) vals.push_back(C(i, j));
  return SpotCovPath(d, k, dn, std::move(vals));
}

inline Eigen::MatrixXd mat(const SpotCovPath& path, std::size_t p) {
  const int d = path.d();
  Eigen::MatrixXd C(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) C(i, j) = path.data(p)[i * d + j];
  return C;
}

// ---------------------------------------------------------------- brute-force oracles
// Direct transcriptions of the displayed sums, all d^4 / d^8 index loops
// spelled out, no sparsity, no caching.

inline double ctilde(const Eigen::MatrixXd& C, int g, int h, int j, int k) {
  return C(g, j) * C(h, k) + C(g, k) * C(h, j);
}

inline double bf_naive(const Functional& H, const Functional& G, const SpotCovPath& path) {
  const std::size_t k = path.k_n(), L = path.size();
  double s = 0.0;
  for (std::size_t p = 0; p + k < L; ++p)
    s += (H.value(mat(path, p + k)) - H.value(mat(path, p))) * (G.value(mat(path, p + k)) - G.value(mat(path, p)));
  return s / static_cast<double>(k);
}

inline double bf_correction(const Functional& H, const Functional& G, const Eigen::MatrixXd& C) {
  const int d = static_cast<int>(C.rows());
  Eigen::MatrixXd gH = H.gradient(C), gG = G.gradient(C);
  double s = 0.0;
  for (int g = 0; g < d; ++g)
    for (int h = 0; h < d; ++h)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s += gH(g, h) * gG(a, b) * (C(g, a) * C(h, b) + C(g, b) * C(h, a));
  return s;
}

inline double bf_an(const Functional& H, const Functional& G, const SpotCovPath& path,
                    const std::vector<bool>* A = nullptr) {
  const std::size_t k = path.k_n(), L = path.size();
  const double kk = static_cast<double>(k);
  double s = 0.0;
  for (std::size_t p = k; p + 2 * k < L; ++p) {
    if (A && !((*A)[p] && (*A)[p + k])) continue;
    Eigen::MatrixXd C = mat(path, p), Cn = mat(path, p + k);
    s += (H.value(Cn) - H.value(C)) * (G.value(Cn) - G.value(C)) - 2.0 / kk * bf_correction(H, G, C);
  }
  return 3.0 / (2.0 * kk) * s;
}

inline double bf_lin(const Functional& H, const Functional& G, const SpotCovPath& path,
                     const std::vector<bool>* A = nullptr) {
  const std::size_t k = path.k_n(), L = path.size();
  const int d = path.d();
  const double kk = static_cast<double>(k);
  double s = 0.0;
  for (std::size_t p = k; p + 2 * k < L; ++p) {
    if (A && !((*A)[p] && (*A)[p + k])) continue;
    Eigen::MatrixXd C = mat(path, p), D = mat(path, p + k) - C;
    Eigen::MatrixXd gH = H.gradient(C), gG = G.gradient(C);
    for (int g = 0; g < d; ++g)
      for (int h = 0; h < d; ++h)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            s += gH(g, h) * gG(a, b) * (D(g, h) * D(a, b) - 2.0 / kk * (C(g, a) * C(h, b) + C(g, b) * C(h, a)));
  }
  return 3.0 / (2.0 * kk) * s;
}

struct BfOmega {
  double o1 = 0, o2 = 0, o3 = 0;
};

inline BfOmega bf_omega(const Functional& Hr, const Functional& Gr, const Functional& Hs, const Functional& Gs,
                        const SpotCovPath& path) {
  const std::size_t k = path.k_n(), L = path.size();
  const int d = path.d();
  const double kk = static_cast<double>(k), dn = path.delta_n();
  BfOmega w;
  for (std::size_t p = k; p + 4 * k < L; ++p) {
    Eigen::MatrixXd C = mat(path, p);
    Eigen::MatrixXd lam = mat(path, p + k) - C;
    Eigen::MatrixXd lam2 = mat(path, p + 3 * k) - mat(path, p + 2 * k);
    Eigen::MatrixXd a1 = Hr.gradient(C), a2 = Gr.gradient(C), a3 = Hs.gradient(C), a4 = Gs.gradient(C);
    for (int g = 0; g < d; ++g)
      for (int h = 0; h < d; ++h)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            for (int j = 0; j < d; ++j)
              for (int kx = 0; kx < d; ++kx)
                for (int l = 0; l < d; ++l)
                  for (int m = 0; m < d; ++m) {
                    double f = a1(g, h) * a2(a, b) * a3(j, kx) * a4(l, m);
                    if (f == 0.0) continue;
                    w.o1 += dn * f *
                            (ctilde(C, g, h, j, kx) * ctilde(C, a, b, l, m) + ctilde(C, a, b, j, kx) * ctilde(C, g, h, l, m));
                    w.o2 += f * 0.5 *
                            (lam(g, h) * lam(j, kx) * lam2(a, b) * lam2(l, m) + lam(a, b) * lam(l, m) * lam2(g, h) * lam2(j, kx) +
                             lam(a, b) * lam(j, kx) * lam2(g, h) * lam2(l, m) + lam(g, h) * lam(l, m) * lam2(a, b) * lam2(j, kx));
                    w.o3 += 3.0 / (2.0 * kk) * f *
                            (ctilde(C, g, h, j, kx) * lam(a, b) * lam(l, m) + ctilde(C, a, b, l, m) * lam(g, h) * lam(j, kx) +
                             ctilde(C, g, h, l, m) * lam(a, b) * lam(j, kx) + ctilde(C, a, b, j, kx) * lam(g, h) * lam(l, m));
                  }
  }
  return w;
}

inline double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace testing_util
