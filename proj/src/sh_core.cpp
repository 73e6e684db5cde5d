#include "slepian/sh_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slepian/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace slepian {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

SphericalPoint::SphericalPoint(double theta, double phi) {
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw ParameterError("colatitude " + std::to_string(theta) + " outside [0, pi]");
  }
  if (!std::isfinite(phi)) throw ParameterError("longitude is not finite");
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  theta_ = theta;
  phi_ = phi;
}

int index(int l, int m) {
  if (l < 0 || m < -l || m > l) {
    throw InvalidOrder("invalid (l, m) = (" + std::to_string(l) + ", " + std::to_string(m) +
                       ")");
  }
  return l * l + l + m;
}

std::pair<int, int> degree_order(int idx) {
  if (idx < 0) throw InvalidOrder("negative coefficient index");
  int l = static_cast<int>(std::sqrt(static_cast<double>(idx)));
  while (l * l > idx) --l;
  while ((l + 1) * (l + 1) <= idx) ++l;
  return {l, idx - l * l - l};
}

HarmonicCoeffs::HarmonicCoeffs(int bandlimit, bool real_field)
    : HarmonicCoeffs(bandlimit,
                     Eigen::VectorXcd::Zero(bandlimit > 0 ? num_coeffs(bandlimit) : 0),
                     real_field) {}

HarmonicCoeffs::HarmonicCoeffs(int bandlimit, Eigen::VectorXcd values, bool real_field)
    : bandlimit_(bandlimit), values_(std::move(values)), real_field_(real_field) {
  if (bandlimit < 1) throw MalformedInput("bandlimit must be positive");
  if (values_.size() != num_coeffs(bandlimit)) {
    throw MalformedInput("coefficient vector has length " + std::to_string(values_.size()) +
                         ", expected " + std::to_string(num_coeffs(bandlimit)));
  }
  if (real_field_ && conjugate_symmetry_residual() > 1e-12) {
    throw MalformedInput("coefficients flagged real_field violate conjugate symmetry");
  }
}

double HarmonicCoeffs::conjugate_symmetry_residual() const {
  const double scale = values_.size() > 0 ? values_.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (int l = 0; l < bandlimit_; ++l) {
    for (int m = 0; m <= l; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const cplx expected = sign * std::conj(values_[l * l + l + m]);
      worst = std::max(worst, std::abs(values_[l * l + l - m] - expected));
    }
  }
  return worst / scale;
}

HarmonicCoeffs HarmonicCoeffs::truncated(int bandlimit) const {
  HarmonicCoeffs out(bandlimit);
  const int n = num_coeffs(std::min(bandlimit, bandlimit_));
  out.values_.head(n) = values_.head(n);
  out.real_field_ = real_field_;
  return out;
}

TriangularTable::TriangularTable(int lmax)
    : lmax_(lmax), data_(static_cast<std::size_t>((lmax + 1) * (lmax + 2) / 2), 0.0) {
  if (lmax < 0) throw MalformedInput("negative lmax");
}

std::size_t TriangularTable::offset(int l, int m) const {
  if (l < 0 || l > lmax_ || m < 0 || m > l) {
    throw InvalidOrder("triangular index (" + std::to_string(l) + ", " + std::to_string(m) +
                       ") outside lmax " + std::to_string(lmax_));
  }
  return static_cast<std::size_t>(l * (l + 1) / 2 + m);
}

std::string_view unit_name(Unit unit) {
  switch (unit) {
    case Unit::dimensionless:
      return "dimensionless";
    case Unit::kg_per_m2:
      return "kg/m^2";
    case Unit::m_ewh:
      return "m-EWH";
  }
  return "?";
}

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw MalformedInput(std::string(name) + " axis is empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) throw MalformedInput(std::string(name) + " axis not finite");
    if (i > 0 && !(axis[i] > axis[i - 1])) {
      throw MalformedInput(std::string(name) + " axis is not strictly increasing");
    }
  }
}

}  // namespace

GridField::GridField(std::vector<double> thetas, std::vector<double> phis, RowMatrixXd values,
                     Unit unit)
    : thetas_(std::move(thetas)), phis_(std::move(phis)), values_(std::move(values)), unit_(unit) {
  check_axis(thetas_, "colatitude");
  check_axis(phis_, "longitude");
  if (values_.rows() != static_cast<Eigen::Index>(thetas_.size()) ||
      values_.cols() != static_cast<Eigen::Index>(phis_.size())) {
    throw MalformedInput("grid values do not match axis lengths");
  }
  if (!values_.allFinite()) throw MalformedInput("grid contains non-finite values");
}

bool GridField::same_axes(const GridField& other) const {
  return thetas_ == other.thetas_ && phis_ == other.phis_;
}

std::vector<double> legendre_table(int bandlimit, double theta) {
  std::vector<double> out(static_cast<std::size_t>(bandlimit * (bandlimit + 1) / 2));
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  double pmm = 0.5 / std::sqrt(kPi);
  for (int m = 0; m < bandlimit; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    out[legendre_offset(m, m)] = pmm;
    if (m + 1 >= bandlimit) continue;
    double prev2 = pmm;
    double prev1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
    out[legendre_offset(m + 1, m)] = prev1;
    for (int l = m + 2; l < bandlimit; ++l) {
      const double ll = static_cast<double>(l) * l;
      const double mm = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
      const double lm1 = static_cast<double>(l - 1) * (l - 1);
      const double b = std::sqrt((lm1 - mm) / (4.0 * lm1 - 1.0));
      const double cur = a * (x * prev1 - b * prev2);
      out[legendre_offset(l, m)] = cur;
      prev2 = prev1;
      prev1 = cur;
    }
  }
  return out;
}

double assoc_legendre(int l, int m, double theta) {
  if (m < 0 || m > l) {
    throw InvalidOrder("assoc_legendre needs 0 <= m <= l, got (" + std::to_string(l) + ", " +
                       std::to_string(m) + ")");
  }
  const double x = std::cos(theta);
  const double s = std::sin(theta);
  double pmm = 0.5 / std::sqrt(kPi);
  for (int k = 1; k <= m; ++k) pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (l == m) return pmm;
  double prev2 = pmm;
  double prev1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
  const double mm = static_cast<double>(m) * m;
  for (int k = m + 2; k <= l; ++k) {
    const double kk = static_cast<double>(k) * k;
    const double km1 = static_cast<double>(k - 1) * (k - 1);
    const double cur = std::sqrt((4.0 * kk - 1.0) / (kk - mm)) *
                       (x * prev1 - std::sqrt((km1 - mm) / (4.0 * km1 - 1.0)) * prev2);
    prev2 = prev1;
    prev1 = cur;
  }
  return prev1;
}

cplx ylm(int l, int m, const SphericalPoint& p) {
  index(l, m);
  const int am = std::abs(m);
  const double x = assoc_legendre(l, am, p.theta());
  const cplx value = std::polar(x, am * p.phi());
  if (m >= 0) return value;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(value);
}

WignerTable::WignerTable(int bandlimit) : bandlimit_(bandlimit) {
  if (bandlimit < 1) throw ParameterError("Wigner table needs bandlimit >= 1");
  if (bandlimit > kMaxBandlimit) {
    throw CapacityError("Wigner table bandlimit " + std::to_string(bandlimit) +
                        " exceeds the supported maximum " + std::to_string(kMaxBandlimit));
  }
  offsets_.resize(static_cast<std::size_t>(bandlimit));
  std::size_t total = 0;
  for (int l = 0; l < bandlimit; ++l) {
    offsets_[l] = total;
    total += static_cast<std::size_t>((2 * l + 1) * (2 * l + 1));
  }
  data_.assign(total, 0.0);
  data_[0] = 1.0;

  // Per row m', start from the closed form of the last column
  //   Delta^l_{m',l} = sqrt(binom(2l, l+m')) / 2^l
  // and descend in the column index with the three-term recurrence at pi/2
  //   sqrt((l-n)(l+n+1)) D_{m',n+1} + sqrt((l+n)(l-n+1)) D_{m',n-1} = -2 m' D_{m',n}.
  // Negative columns come from D_{m',-n} = (-1)^{l+m'} D_{m',n}.
  for (int l = 1; l < bandlimit; ++l) {
    const int w = 2 * l + 1;
    double* block = data_.data() + offsets_[l];
    auto at = [&](int mp, int n) -> double& { return block[(mp + l) * w + (n + l)]; };
    double seed = std::ldexp(1.0, -l);
    for (int mp = -l; mp <= l; ++mp) {
      if (mp > -l) seed *= std::sqrt(static_cast<double>(l - mp + 1) / (l + mp));
      at(mp, l) = seed;
      at(mp, l - 1) = -2.0 * mp * seed / std::sqrt(2.0 * l);
      for (int n = l - 1; n >= 1; --n) {
        const double up = std::sqrt(static_cast<double>(l - n) * (l + n + 1));
        const double down = std::sqrt(static_cast<double>(l + n) * (l - n + 1));
        at(mp, n - 1) = (-2.0 * mp * at(mp, n) - up * at(mp, n + 1)) / down;
      }
      if ((l + mp) % 2 != 0) at(mp, 0) = 0.0;
      const double sign = ((l + mp) % 2 == 0) ? 1.0 : -1.0;
      for (int n = 1; n <= l; ++n) at(mp, -n) = sign * at(mp, n);
    }
  }
}

double WignerTable::operator()(int l, int m, int n) const {
  if (l < 0 || l >= bandlimit_ || std::abs(m) > l || std::abs(n) > l) {
    throw InvalidOrder("Wigner index (" + std::to_string(l) + ", " + std::to_string(m) + ", " +
                       std::to_string(n) + ") out of range");
  }
  const int w = 2 * l + 1;
  return data_[offsets_[l] + static_cast<std::size_t>((m + l) * w + (n + l))];
}

WignerTable wigner_table(int bandlimit) { return WignerTable(bandlimit); }

std::vector<double> equiangular_thetas(int n_theta, RingLayout layout) {
  if (n_theta < 2) throw ParameterError("need at least two colatitude rings");
  std::vector<double> out(static_cast<std::size_t>(n_theta));
  for (int j = 0; j < n_theta; ++j) {
    out[j] = layout == RingLayout::midpoint ? (j + 0.5) * kPi / n_theta
                                            : j * kPi / (n_theta - 1);
  }
  return out;
}

std::vector<double> equiangular_phis(int n_phi, double phi0) {
  if (n_phi < 1) throw ParameterError("need at least one longitude column");
  std::vector<double> out(static_cast<std::size_t>(n_phi));
  for (int k = 0; k < n_phi; ++k) out[k] = phi0 + k * 2.0 * kPi / n_phi;
  return out;
}

namespace {

constexpr double kAxisTolerance = 1e-9;

bool matches(std::span<const double> axis, auto&& ideal) {
  for (std::size_t j = 0; j < axis.size(); ++j) {
    if (std::abs(axis[j] - ideal(static_cast<int>(j))) > kAxisTolerance) return false;
  }
  return true;
}

void check_longitudes(std::span<const double> phis) {
  const int n = static_cast<int>(phis.size());
  const double step = 2.0 * kPi / n;
  if (!matches(phis, [&](int k) { return phis[0] + k * step; })) {
    throw UndersampledGrid("longitudes are not an equiangular full circle");
  }
}

}  // namespace

std::vector<double> ring_weights(std::span<const double> thetas) {
  const int n = static_cast<int>(thetas.size());
  if (n < 2) throw UndersampledGrid("need at least two colatitude rings");
  std::vector<double> w(static_cast<std::size_t>(n));
  if (matches(thetas, [&](int j) { return (j + 0.5) * kPi / n; })) {
    // Fejer's first rule.
    for (int j = 0; j < n; ++j) {
      const double t = (j + 0.5) * kPi / n;
      double sum = 0.0;
      for (int k = 1; k <= n / 2; ++k) sum += std::cos(2.0 * k * t) / (4.0 * k * k - 1.0);
      w[j] = 2.0 / n * (1.0 - 2.0 * sum);
    }
    return w;
  }
  const int intervals = n - 1;
  if (matches(thetas, [&](int j) { return j * kPi / intervals; })) {
    // Clenshaw-Curtis.
    for (int j = 0; j <= intervals; ++j) {
      const double t = j * kPi / intervals;
      double sum = 0.0;
      for (int k = 1; k <= intervals / 2; ++k) {
        const double b = (2 * k == intervals) ? 1.0 : 2.0;
        sum += b * std::cos(2.0 * k * t) / (4.0 * k * k - 1.0);
      }
      const double c = (j == 0 || j == intervals) ? 1.0 : 2.0;
      w[j] = c / intervals * (1.0 - sum);
    }
    return w;
  }
  throw UndersampledGrid("colatitudes are not a full equiangular ring set");
}

RowMatrixXcd synthesis_complex(const HarmonicCoeffs& c, std::span<const double> thetas,
                               std::span<const double> phis, Execution exec) {
  const int L = c.bandlimit();
  const int n_theta = static_cast<int>(thetas.size());
  const int n_phi = static_cast<int>(phis.size());
  RowMatrixXcd expo(n_phi, L);
  for (int k = 0; k < n_phi; ++k) {
    for (int m = 0; m < L; ++m) expo(k, m) = std::polar(1.0, m * phis[k]);
  }
  const auto& v = c.values();
  RowMatrixXcd out(n_theta, n_phi);
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (int j = 0; j < n_theta; ++j) {
    const std::vector<double> leg = legendre_table(L, thetas[j]);
    std::vector<cplx> pos(static_cast<std::size_t>(L)), neg(static_cast<std::size_t>(L));
    for (int m = 0; m < L; ++m) {
      cplx a = 0.0, b = 0.0;
      for (int l = m; l < L; ++l) {
        const double x = leg[legendre_offset(l, m)];
        a += v[l * l + l + m] * x;
        if (m > 0) b += v[l * l + l - m] * x;
      }
      pos[m] = a;
      neg[m] = (m % 2 == 0) ? b : -b;
    }
    for (int k = 0; k < n_phi; ++k) {
      cplx sum = pos[0];
      for (int m = 1; m < L; ++m) {
        const cplx e = expo(k, m);
        sum += pos[m] * e + neg[m] * std::conj(e);
      }
      out(j, k) = sum;
    }
  }
  return out;
}

GridField synthesis(const HarmonicCoeffs& c, std::span<const double> thetas,
                    std::span<const double> phis, Execution exec) {
  const RowMatrixXcd full = synthesis_complex(c, thetas, phis, exec);
  return GridField(std::vector<double>(thetas.begin(), thetas.end()),
                   std::vector<double>(phis.begin(), phis.end()), full.real());
}

HarmonicCoeffs analysis(const GridField& g, int bandlimit, Execution exec) {
  const int L = bandlimit;
  if (L < 1) throw ParameterError("bandlimit must be positive");
  const auto& thetas = g.thetas();
  const auto& phis = g.phis();
  const int n_theta = static_cast<int>(thetas.size());
  const int n_phi = static_cast<int>(phis.size());
  if (n_theta < 2 * L || n_phi < 2 * L) {
    throw UndersampledGrid("grid of " + std::to_string(n_theta) + "x" + std::to_string(n_phi) +
                           " samples cannot resolve bandlimit " + std::to_string(L) +
                           " (needs at least " + std::to_string(2 * L) + "x" +
                           std::to_string(2 * L) + ")");
  }
  const std::vector<double> weights = ring_weights(thetas);
  check_longitudes(phis);

  const double dphi = 2.0 * kPi / n_phi;
  RowMatrixXcd expo(n_phi, L);
  for (int k = 0; k < n_phi; ++k) {
    for (int m = 0; m < L; ++m) expo(k, m) = std::polar(dphi, -m * phis[k]);
  }
  const int n_leg = L * (L + 1) / 2;
  RowMatrixXcd ring(n_theta, L);
  RowMatrixXd leg(n_theta, n_leg);
  const auto& vals = g.values();
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (int j = 0; j < n_theta; ++j) {
    for (int m = 0; m < L; ++m) {
      cplx sum = 0.0;
      for (int k = 0; k < n_phi; ++k) sum += vals(j, k) * expo(k, m);
      ring(j, m) = sum * weights[j];
    }
    const std::vector<double> row = legendre_table(L, thetas[j]);
    for (int i = 0; i < n_leg; ++i) leg(j, i) = row[i];
  }

  Eigen::VectorXcd out(num_coeffs(L));
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (int l = 0; l < L; ++l) {
    for (int m = 0; m <= l; ++m) {
      cplx sum = 0.0;
      const int col = legendre_offset(l, m);
      for (int j = 0; j < n_theta; ++j) sum += leg(j, col) * ring(j, m);
      out[l * l + l + m] = sum;
      if (m > 0) out[l * l + l - m] = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(sum);
    }
  }
  return HarmonicCoeffs(L, std::move(out), true);
}

HarmonicCoeffs pack_real_pair(const TriangularTable& c, const TriangularTable& s,
                              int bandlimit) {
  if (bandlimit < 1) throw ParameterError("bandlimit must be positive");
  for (int l = 0; l <= s.lmax(); ++l) {
    if (s(l, 0) != 0.0) {
      throw MalformedInput("S(" + std::to_string(l) + ", 0) must be zero");
    }
  }
  const double k0 = std::sqrt(4.0 * kPi);
  const double km = std::sqrt(2.0 * kPi);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(num_coeffs(bandlimit));
  for (int l = 0; l < bandlimit; ++l) {
    for (int m = 0; m <= l; ++m) {
      const double cv = l <= c.lmax() ? c(l, m) : 0.0;
      const double sv = l <= s.lmax() ? s(l, m) : 0.0;
      if (m == 0) {
        v[l * l + l] = k0 * cv;
        continue;
      }
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const cplx value = sign * km * cplx(cv, -sv);
      v[l * l + l + m] = value;
      v[l * l + l - m] = sign * std::conj(value);
    }
  }
  return HarmonicCoeffs(bandlimit, std::move(v), true);
}

std::pair<TriangularTable, TriangularTable> unpack_real_pair(const HarmonicCoeffs& coeffs) {
  const int L = coeffs.bandlimit();
  TriangularTable c(L - 1), s(L - 1);
  const double k0 = std::sqrt(4.0 * kPi);
  const double km = std::sqrt(2.0 * kPi);
  for (int l = 0; l < L; ++l) {
    c(l, 0) = coeffs(l, 0).real() / k0;
    for (int m = 1; m <= l; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const cplx value = sign * coeffs(l, m) / km;
      c(l, m) = value.real();
      s(l, m) = -value.imag();
    }
  }
  return {std::move(c), std::move(s)};
}

}  // namespace slepian
