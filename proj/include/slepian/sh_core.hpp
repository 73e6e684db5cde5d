#pragma once

#include <complex>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "slepian/execution.hpp"

namespace slepian {

using cplx = std::complex<double>;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kPi = std::numbers::pi;

// Degrees above 128 are not supported; tables refuse anything larger.
inline constexpr int kMaxBandlimit = 129;

class SphericalPoint {
 public:
  // theta must lie in [0, pi]; phi is wrapped into [0, 2*pi).
  SphericalPoint(double theta, double phi);

  double theta() const noexcept { return theta_; }
  double phi() const noexcept { return phi_; }

 private:
  double theta_;
  double phi_;
};

// Position of (l, m) in the coefficient vector: l*l + l + m.
int index(int l, int m);

constexpr int num_coeffs(int bandlimit) { return bandlimit * bandlimit; }

// Inverse of index(): returns {l, m}.
std::pair<int, int> degree_order(int idx);

class HarmonicCoeffs {
 public:
  explicit HarmonicCoeffs(int bandlimit, bool real_field = false);
  // Throws MalformedInput if the length is wrong or real_field is claimed but
  // the conjugate symmetry does not hold to 1e-12 relative.
  HarmonicCoeffs(int bandlimit, Eigen::VectorXcd values, bool real_field = false);

  int bandlimit() const noexcept { return bandlimit_; }
  bool real_field() const noexcept { return real_field_; }

  const Eigen::VectorXcd& values() const noexcept { return values_; }
  Eigen::VectorXcd& values() noexcept { return values_; }

  cplx operator()(int l, int m) const { return values_[index(l, m)]; }
  cplx& operator()(int l, int m) { return values_[index(l, m)]; }

  // max |v[l,-m] - (-1)^m conj(v[l,m])| relative to max |v|.
  double conjugate_symmetry_residual() const;

  // Keeps degrees below `bandlimit` (which may exceed the current one, in
  // which case the new degrees are zero).
  HarmonicCoeffs truncated(int bandlimit) const;

 private:
  int bandlimit_;
  Eigen::VectorXcd values_;
  bool real_field_;
};

// Real lower-triangular table t(l, m), 0 <= m <= l <= lmax, as used for
// geodesy Stokes coefficients.
class TriangularTable {
 public:
  TriangularTable() = default;
  explicit TriangularTable(int lmax);

  int lmax() const noexcept { return lmax_; }
  double operator()(int l, int m) const { return data_[offset(l, m)]; }
  double& operator()(int l, int m) { return data_[offset(l, m)]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const TriangularTable&) const = default;

 private:
  std::size_t offset(int l, int m) const;

  int lmax_ = -1;
  std::vector<double> data_;
};

enum class Unit { dimensionless, kg_per_m2, m_ewh };

std::string_view unit_name(Unit unit);

// Samples on a colatitude x longitude product grid, row = constant theta.
class GridField {
 public:
  GridField() = default;
  GridField(std::vector<double> thetas, std::vector<double> phis, RowMatrixXd values,
            Unit unit = Unit::dimensionless);

  const std::vector<double>& thetas() const noexcept { return thetas_; }
  const std::vector<double>& phis() const noexcept { return phis_; }
  const RowMatrixXd& values() const noexcept { return values_; }
  RowMatrixXd& values() noexcept { return values_; }
  Unit unit() const noexcept { return unit_; }
  void set_unit(Unit unit) noexcept { unit_ = unit; }

  bool same_axes(const GridField& other) const;

 private:
  std::vector<double> thetas_;
  std::vector<double> phis_;
  RowMatrixXd values_;
  Unit unit_ = Unit::dimensionless;
};

// Orthonormal associated Legendre function X_l^m(theta) with Condon-Shortley
// phase, so that Y_l^m = X_l^m(theta) e^{i m phi}.
double assoc_legendre(int l, int m, double theta);

// All X_l^m(theta) for 0 <= m <= l < bandlimit, stored at l*(l+1)/2 + m.
std::vector<double> legendre_table(int bandlimit, double theta);
inline constexpr int legendre_offset(int l, int m) { return l * (l + 1) / 2 + m; }

cplx ylm(int l, int m, const SphericalPoint& p);

// Delta^l_{m,n} = d^l_{m,n}(pi/2), full square per degree.
class WignerTable {
 public:
  explicit WignerTable(int bandlimit);

  int bandlimit() const noexcept { return bandlimit_; }
  double operator()(int l, int m, int n) const;

 private:
  int bandlimit_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

WignerTable wigner_table(int bandlimit);

enum class RingLayout { midpoint, endpoints };

// Equiangular sample axes. `midpoint` puts rings at (j + 1/2) * pi / n
// (cell centres, as in lat/lon products); `endpoints` includes both poles.
std::vector<double> equiangular_thetas(int n_theta, RingLayout layout = RingLayout::midpoint);
std::vector<double> equiangular_phis(int n_phi, double phi0 = 0.0);

// Per-ring weights integrating polynomials in cos(theta) of degree < n_theta
// (midpoint) or <= n_theta - 1 (endpoints) against sin(theta) d theta exactly.
// Throws UndersampledGrid if the axis is not a full equiangular ring set.
std::vector<double> ring_weights(std::span<const double> thetas);

// Complex field on the grid, sum over l < L, |m| <= l of c_lm Y_l^m.
RowMatrixXcd synthesis_complex(const HarmonicCoeffs& c, std::span<const double> thetas,
                               std::span<const double> phis,
                               Execution exec = Execution::parallel);

// Real field; the imaginary part is dropped. For real_field input the
// dropped residue is below 1e-10 of the field's scale.
GridField synthesis(const HarmonicCoeffs& c, std::span<const double> thetas,
                    std::span<const double> phis, Execution exec = Execution::parallel);

// Inner products <g, Y_l^m> by exact equiangular quadrature. Requires at
// least 2L rings and 2L longitude columns covering the whole sphere.
HarmonicCoeffs analysis(const GridField& g, int bandlimit,
                        Execution exec = Execution::parallel);

// Geodesy 4pi-normalized real pairs (C, S) to orthonormal complex
// coefficients: v[l,0] = sqrt(4pi) C, v[l,m>0] = (-1)^m sqrt(2pi) (C - iS),
// negative orders by conjugate symmetry.
HarmonicCoeffs pack_real_pair(const TriangularTable& c, const TriangularTable& s,
                              int bandlimit);

// Exact inverse of pack_real_pair for a real_field coefficient set.
std::pair<TriangularTable, TriangularTable> unpack_real_pair(const HarmonicCoeffs& coeffs);

}  // namespace slepian
