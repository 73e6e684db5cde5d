#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slepian/execution.hpp"
#include "slepian/sh_core.hpp"

namespace slepian {

// Colatitude-longitude box, radians. 0 <= theta1 < theta2 <= pi and
// 0 <= phi1 < phi2 <= 2pi; boxes crossing phi = 0 must be split by the caller.
class LatLonBox {
 public:
  LatLonBox(double theta1, double theta2, double phi1, double phi2);
  static LatLonBox from_degrees(double theta1, double theta2, double phi1, double phi2);

  double theta1() const noexcept { return theta1_; }
  double theta2() const noexcept { return theta2_; }
  double phi1() const noexcept { return phi1_; }
  double phi2() const noexcept { return phi2_; }

  double area() const;
  bool contains(double theta, double phi) const;
  bool interiors_overlap(const LatLonBox& other) const;

 private:
  double theta1_, theta2_, phi1_, phi2_;
};

class Region {
 public:
  // Throws MalformedInput when empty or when two boxes overlap.
  Region(std::vector<LatLonBox> boxes, std::string name = "region");

  const std::vector<LatLonBox>& boxes() const noexcept { return boxes_; }
  const std::string& name() const noexcept { return name_; }
  double area() const;
  bool contains(double theta, double phi) const;

  static Region full_sphere();

 private:
  std::vector<LatLonBox> boxes_;
  std::string name_;
};

// Region CSV: one `theta1,theta2,phi1,phi2` row per box, degrees, `#` comments.
Region load_region(const std::filesystem::path& path);
Region parse_region(std::string_view text, std::string name = "region");

class ConcentrationKernel {
 public:
  ConcentrationKernel(int bandlimit, Eigen::MatrixXcd entries);

  int bandlimit() const noexcept { return bandlimit_; }
  const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
  Eigen::MatrixXcd& entries() noexcept { return entries_; }

  double hermitian_residual() const;
  cplx trace() const { return entries_.trace(); }

 private:
  int bandlimit_;
  Eigen::MatrixXcd entries_;
};

// Closed forms of the one-dimensional integrals in the kernel.
// q_integral(m) = int_{theta1}^{theta2} e^{i m theta} sin(theta) d theta
cplx q_integral(int m, double theta1, double theta2);
// s_integral(m) = int_{phi1}^{phi2} e^{i m phi} d phi
cplx s_integral(int m, double phi1, double phi2);

// Fourier coefficient of X_l^m(theta) at frequency m':
//   F^l_{m',m} = (-i)^m sqrt((2l+1)/(4pi)) Delta^l_{m',m} Delta^l_{m',0}
// so that X_l^m(theta) = sum_{m'} F^l_{m',m} e^{i m' theta}.
cplx f_coeff(int l, int mprime, int m, const WignerTable& wigner);

ConcentrationKernel kernel_box(const LatLonBox& box, int bandlimit, const WignerTable& wigner,
                               Execution exec = Execution::parallel);
ConcentrationKernel kernel_region(const Region& region, int bandlimit,
                                  Execution exec = Execution::parallel);

// Binary cache: magic "SLEPKRN1", uint32 L (LE), then the upper triangle
// (diagonal included) of the L^2 x L^2 matrix in row-major order as LE
// float64 (re, im) pairs. The lower triangle is rebuilt on load.
void save_kernel(const ConcentrationKernel& kernel, const std::filesystem::path& path);
ConcentrationKernel load_kernel(const std::filesystem::path& path);

struct WindowFunction {
  HarmonicCoeffs coeffs{1};
  double lambda = 0.0;
  std::optional<Region> region;
  int iterations = 0;
  double residual = 0.0;
  // Estimated distance to the next eigenvalue; a warning is attached when it
  // falls below the degeneracy threshold.
  double gap_estimate = 0.0;
  std::vector<std::string> warnings;
};

enum class EigenMethod {
  // Power iteration on (sigma I - K)^{-1}, sigma just above the spectrum.
  shift_invert,
  // Power iteration on K itself.
  power,
};

struct EigenOptions {
  EigenMethod method = EigenMethod::shift_invert;
  int max_iterations = 10000;
  double eigenvalue_tolerance = 1e-12;
  double residual_tolerance = 1e-9;
  double degeneracy_gap = 1e-10;
  Execution exec = Execution::parallel;
};

// Dominant eigenpair of a Hermitian PSD kernel. Seeded with K e_0, so the
// result is deterministic. The phase is fixed so the (0,0) coefficient, and
// hence the region mean of the window, is real and nonnegative. Throws
// ConvergenceError when the iteration cap is reached.
WindowFunction solve_max_concentration(const ConcentrationKernel& kernel,
                                       const EigenOptions& options = {});

// K f with rows distributed over threads.
Eigen::VectorXcd kernel_apply(const Eigen::MatrixXcd& k, const Eigen::VectorXcd& f,
                              Execution exec = Execution::parallel);

// Energy of the window inside the region over its energy on the whole
// sphere, both by direct spatial quadrature.
double concentration_ratio_spatial(const HarmonicCoeffs& window, const Region& region);
double concentration_ratio_spatial(const WindowFunction& window, const Region& region);

// Window file: `# bandlimit`, `# lambda`, `# region` header lines then
// `l,m,re,im` rows, numbers in shortest round-trip form.
void save_window(const WindowFunction& window, const std::filesystem::path& path);
WindowFunction load_window(const std::filesystem::path& path);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace slepian
