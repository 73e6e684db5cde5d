#pragma once

// Test-side reference formulas. Each one is written from a closed form that
// the library does not use, so agreement is evidence rather than tautology.

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slepian/sh_core.hpp"

namespace oracle {

using ld = long double;
constexpr ld kPiL = 3.141592653589793238462643383279502884L;

inline ld factorial(int n) {
  ld f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline ld binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Orthonormal X_l^m(theta), Condon-Shortley phase, from the explicit
// power-series form of P_l and its m-th derivative. The sin factor keeps its
// sign, so the function is the analytic continuation in theta.
inline double legendre_explicit(int l, int m, double theta) {
  const ld x = std::cos(static_cast<ld>(theta));
  const ld s = std::sin(static_cast<ld>(theta));
  // P_l(x) = 2^-l sum_k (-1)^k C(l,k) C(2l-2k,l) x^(l-2k); differentiate m times.
  ld deriv = 0.0L;
  for (int k = 0; 2 * k <= l; ++k) {
    const int power = l - 2 * k;
    if (power < m) continue;
    const ld coeff = ((k % 2) ? -1.0L : 1.0L) * binomial(l, k) * binomial(2 * l - 2 * k, l) *
                     factorial(power) / factorial(power - m);
    deriv += coeff * std::pow(x, static_cast<ld>(power - m));
  }
  deriv /= std::pow(2.0L, static_cast<ld>(l));
  const ld norm = std::sqrt((2 * l + 1) / (4 * kPiL) * factorial(l - m) / factorial(l + m));
  const ld cs = (m % 2) ? -1.0L : 1.0L;
  return static_cast<double>(cs * norm * std::pow(s, static_cast<ld>(m)) * deriv);
}

// d^j_{m',m}(pi/2) from the factorial sum.
inline double wigner_explicit(int j, int mp, int m) {
  ld sum = 0.0L;
  for (int s = 0; s <= 2 * j; ++s) {
    if (j + m - s < 0 || mp - m + s < 0 || j - mp - s < 0) continue;
    const ld term = ((mp - m + s) % 2 ? -1.0L : 1.0L) /
                    (factorial(j + m - s) * factorial(s) * factorial(mp - m + s) *
                     factorial(j - mp - s));
    sum += term;
  }
  const ld pref = std::sqrt(factorial(j + mp) * factorial(j - mp) * factorial(j + m) *
                            factorial(j - m));
  return static_cast<double>(pref * sum * std::pow(0.5L, static_cast<ld>(j)));
}

// Fourier coefficient at frequency mp of theta -> X_l^m(theta) by a DFT of
// the continued function over a full period.
inline std::complex<double> legendre_fourier(int l, int mp, int m) {
  const int n = 4 * (l + 2);
  std::complex<ld> acc = 0.0L;
  for (int k = 0; k < n; ++k) {
    const ld t = 2 * kPiL * k / n;
    const ld v = legendre_explicit(l, m, static_cast<double>(t));
    acc += v * std::complex<ld>(std::cos(mp * t), -std::sin(mp * t));
  }
  acc /= static_cast<ld>(n);
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

// Random coefficients satisfying the real-field conjugate symmetry.
inline slepian::HarmonicCoeffs random_real_coeffs(int L, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(L * L);
  for (int l = 0; l < L; ++l) {
    v[l * l + l] = g(rng);
    for (int m = 1; m <= l; ++m) {
      const std::complex<double> c(g(rng), g(rng));
      v[l * l + l + m] = c;
      v[l * l + l - m] = ((m % 2) ? -1.0 : 1.0) * std::conj(c);
    }
  }
  return slepian::HarmonicCoeffs(L, v, true);
}

// Random Hermitian PSD matrix with spectrum in [0, 1].
inline Eigen::MatrixXcd random_psd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  }
  Eigen::MatrixXcd k = a * a.adjoint();
  k /= k.cwiseAbs().rowwise().sum().maxCoeff();
  return 0.5 * (k + k.adjoint());
}

// Scratch directory removed when the object dies.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("slepian_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
