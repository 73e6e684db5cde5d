#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "slepian/errors.hpp"
#include "slepian/sh_core.hpp"

using namespace slepian;

namespace {

double max_abs(const Eigen::VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("index follows the l^2 + l + m layout") {
  CHECK(index(0, 0) == 0);
  CHECK(index(1, -1) == 1);
  CHECK(index(2, 2) == 8);
  CHECK_THROWS_AS(index(2, 3), InvalidOrder);
  CHECK_THROWS_AS(index(1, -2), InvalidOrder);
  std::vector<int> seen(num_coeffs(12), 0);
  for (int l = 0; l < 12; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int i = index(l, m);
      REQUIRE(i >= 0);
      REQUIRE(i < num_coeffs(12));
      ++seen[i];
      CHECK(degree_order(i) == std::make_pair(l, m));
    }
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("spherical points normalize longitude") {
  const SphericalPoint p(1.0, -0.5);
  CHECK(p.phi() == doctest::Approx(2.0 * kPi - 0.5).epsilon(1e-15));
  CHECK(SphericalPoint(0.3, 2.0 * kPi).phi() == doctest::Approx(0.0));
  CHECK_THROWS(SphericalPoint(-0.1, 0.0));
  CHECK_THROWS(SphericalPoint(3.2, 0.0));
}

TEST_CASE("associated Legendre values") {
  CHECK(assoc_legendre(0, 0, 0.77) == doctest::Approx(0.2820947918).epsilon(1e-10));
  CHECK(assoc_legendre(1, 0, 0.0) == doctest::Approx(0.4886025119).epsilon(1e-10));
  CHECK(std::abs(assoc_legendre(10, 5, 1.0) - oracle::legendre_explicit(10, 5, 1.0)) < 1e-13);
  CHECK_THROWS_AS(assoc_legendre(3, 4, 0.1), InvalidOrder);
  CHECK_THROWS_AS(assoc_legendre(3, -1, 0.1), InvalidOrder);
}

TEST_CASE("associated Legendre matches the explicit formula over a sweep") {
  double worst = 0.0;
  for (int l = 0; l <= 18; ++l) {
    for (int m = 0; m <= l; ++m) {
      for (double t : {0.0, 0.01, 0.4, 1.0, 1.5707963, 2.2, 3.0, kPi}) {
        worst = std::max(worst, std::abs(assoc_legendre(l, m, t) - oracle::legendre_explicit(l, m, t)));
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("legendre_table agrees with single evaluations") {
  const auto t = legendre_table(20, 0.9);
  for (int l = 0; l < 20; ++l) {
    for (int m = 0; m <= l; ++m) {
      CHECK(t[legendre_offset(l, m)] == doctest::Approx(assoc_legendre(l, m, 0.9)).epsilon(1e-14));
    }
  }
}

TEST_CASE("ylm conventions") {
  const cplx y00 = ylm(0, 0, SphericalPoint(kPi / 3, 1.0));
  CHECK(y00.real() == doctest::Approx(0.2820947918).epsilon(1e-10));
  CHECK(y00.imag() == 0.0);
  const cplx y11 = ylm(1, 1, SphericalPoint(kPi / 2, 0.0));
  CHECK(y11.real() == doctest::Approx(-std::sqrt(3.0 / (8.0 * kPi))).epsilon(1e-12));
  CHECK(std::abs(y11.imag()) < 1e-15);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const SphericalPoint p(kPi * u(rng), 2 * kPi * u(rng));
    CHECK(std::abs(ylm(2, -1, p) + std::conj(ylm(2, 1, p))) < 1e-15);
  }
}

TEST_CASE("Wigner table at pi/2") {
  const WignerTable one(1);
  CHECK(one(0, 0, 0) == 1.0);
  const WignerTable w = wigner_table(13);
  CHECK(std::abs(w(1, 0, 0)) < 1e-15);
  double worst = 0.0;
  for (int l = 0; l < 13; ++l) {
    for (int m = -l; m <= l; ++m) {
      for (int n = -l; n <= l; ++n) {
        worst = std::max(worst, std::abs(w(l, m, n) - oracle::wigner_explicit(l, m, n)));
        const double sym = ((m - n) % 2 == 0) ? 1.0 : -1.0;
        CHECK(std::abs(w(l, m, n) - sym * w(l, n, m)) < 1e-12);
      }
    }
  }
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(WignerTable(kMaxBandlimit + 1), CapacityError);
  CHECK_THROWS_AS(w(2, 3, 0), InvalidOrder);
}

TEST_CASE("Wigner rows are orthonormal") {
  for (int L : {8, 40}) {
    const WignerTable w(L);
    double worst = 0.0;
    for (int l = 0; l < L; ++l) {
      for (int n = -l; n <= l; ++n) {
        for (int np = -l; np <= l; ++np) {
          double s = 0.0;
          for (int m = -l; m <= l; ++m) s += w(l, m, n) * w(l, m, np);
          worst = std::max(worst, std::abs(s - (n == np ? 1.0 : 0.0)));
        }
      }
    }
    CHECK(worst < (L == 8 ? 1e-12 : 1e-10));
  }
}

TEST_CASE("synthesis examples") {
  const auto th = equiangular_thetas(12);
  const auto ph = equiangular_phis(16);
  HarmonicCoeffs c(4, true);
  c(0, 0) = std::sqrt(4.0 * kPi);
  const GridField g = synthesis(c, th, ph);
  CHECK((g.values().array() - 1.0).abs().maxCoeff() < 1e-14);

  HarmonicCoeffs d(4, true);
  d(2, 0) = 1.0;
  const GridField h = synthesis(d, th, ph);
  for (std::size_t j = 0; j < th.size(); ++j) {
    for (std::size_t k = 0; k < ph.size(); ++k) {
      CHECK(h.values()(j, k) == doctest::Approx(assoc_legendre(2, 0, th[j])).epsilon(1e-13));
    }
  }
}

TEST_CASE("analysis examples") {
  const auto th = equiangular_thetas(32);
  const auto ph = equiangular_phis(32);
  const GridField ones(th, ph, RowMatrixXd::Ones(32, 32));
  const HarmonicCoeffs c = analysis(ones, 16);
  CHECK(c(0, 0).real() == doctest::Approx(std::sqrt(4.0 * kPi)).epsilon(1e-13));
  Eigen::VectorXcd rest = c.values();
  rest[0] = 0.0;
  CHECK(max_abs(rest) < 1e-12);

  // Real part of Y_3^2 is (Y_3^2 + conj(Y_3^2)) / 2 = (Y_3^2 + Y_3^-2) / 2.
  RowMatrixXd y(32, 32);
  for (int j = 0; j < 32; ++j) {
    for (int k = 0; k < 32; ++k) y(j, k) = ylm(3, 2, SphericalPoint(th[j], ph[k])).real();
  }
  const HarmonicCoeffs a = analysis(GridField(th, ph, y), 8);
  CHECK(std::abs(a(3, 2) - 0.5) < 1e-13);
  CHECK(std::abs(a(3, -2) - 0.5) < 1e-13);
  Eigen::VectorXcd others = a.values();
  others[index(3, 2)] = 0.0;
  others[index(3, -2)] = 0.0;
  CHECK(max_abs(others) < 1e-13);
}

TEST_CASE("analysis refuses undersampled grids") {
  const GridField g(equiangular_thetas(20), equiangular_phis(40), RowMatrixXd::Zero(20, 40));
  CHECK_THROWS_AS(analysis(g, 11), UndersampledGrid);
  CHECK_NOTHROW(analysis(g, 10));
  const GridField narrow(equiangular_thetas(40), equiangular_phis(20), RowMatrixXd::Zero(40, 20));
  CHECK_THROWS_AS(analysis(narrow, 11), UndersampledGrid);
  const GridField partial({0.1, 0.2, 0.3}, {0.0, 1.0}, RowMatrixXd::Zero(3, 2));
  CHECK_THROWS_AS(analysis(partial, 1), UndersampledGrid);
}

TEST_CASE("round trip and Parseval on both ring layouts") {
  std::mt19937_64 rng(11);
  for (int L : {8, 16, 32}) {
    const HarmonicCoeffs c = oracle::random_real_coeffs(L, rng);
    for (RingLayout layout : {RingLayout::midpoint, RingLayout::endpoints}) {
      const int n_theta = layout == RingLayout::midpoint ? 2 * L : 2 * L + 1;
      const auto th = equiangular_thetas(n_theta, layout);
      const auto ph = equiangular_phis(2 * L);
      const GridField g = synthesis(c, th, ph);
      const HarmonicCoeffs back = analysis(g, L);
      CHECK(max_abs(back.values() - c.values()) < 1e-9);
      const auto w = ring_weights(th);
      double energy = 0.0;
      for (int j = 0; j < n_theta; ++j) {
        energy += w[j] * (2.0 * kPi / (2 * L)) * g.values().row(j).squaredNorm();
      }
      CHECK(std::abs(energy - c.values().squaredNorm()) < 1e-8 * c.values().squaredNorm());
    }
  }
}

TEST_CASE("ring weights integrate sin(theta)") {
  for (RingLayout layout : {RingLayout::midpoint, RingLayout::endpoints}) {
    const auto th = equiangular_thetas(17, layout);
    const auto w = ring_weights(th);
    double s = 0.0, c2 = 0.0;
    for (std::size_t j = 0; j < th.size(); ++j) {
      s += w[j];
      c2 += w[j] * std::cos(th[j]) * std::cos(th[j]);
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("addition theorem") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int L : {8, 32, 64}) {
    for (int i = 0; i < 100; ++i) {
      const SphericalPoint p(kPi * u(rng), 2.0 * kPi * u(rng));
      double s = 0.0;
      for (int l = 0; l < L; ++l) {
        for (int m = -l; m <= l; ++m) s += std::norm(ylm(l, m, p));
      }
      CHECK(std::abs(s - L * L / (4.0 * kPi)) < 1e-9 * L * L / (4.0 * kPi));
    }
  }
}

TEST_CASE("pack_real_pair") {
  TriangularTable c(7), s(7);
  const HarmonicCoeffs zero = pack_real_pair(c, s, 8);
  CHECK(max_abs(zero.values()) == 0.0);

  c(0, 0) = 1.0;
  const HarmonicCoeffs one = pack_real_pair(c, s, 8);
  CHECK(one(0, 0) == cplx(std::sqrt(4.0 * kPi), 0.0));
  Eigen::VectorXcd rest = one.values();
  rest[0] = 0.0;
  CHECK(max_abs(rest) == 0.0);
  CHECK(one.real_field());

  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int l = 0; l <= 7; ++l) {
    for (int m = 0; m <= l; ++m) {
      c(l, m) = g(rng);
      s(l, m) = m == 0 ? 0.0 : g(rng);
    }
  }
  const HarmonicCoeffs packed = pack_real_pair(c, s, 8);
  const auto th = equiangular_thetas(23);
  const auto ph = equiangular_phis(31);
  const RowMatrixXcd field = synthesis_complex(packed, th, ph);
  CHECK(field.imag().cwiseAbs().maxCoeff() < 1e-10);
  // Geodesy form: sum (C cos m phi + S sin m phi) Pbar_lm.
  for (int j : {0, 7, 15}) {
    for (int k : {0, 13, 30}) {
      double expect = 0.0;
      for (int l = 0; l <= 7; ++l) {
        for (int m = 0; m <= l; ++m) {
          // Geodesy functions carry no Condon-Shortley phase.
          const double pbar = ((m % 2) ? -1.0 : 1.0) * std::sqrt(4.0 * kPi * (m == 0 ? 1.0 : 2.0)) *
                              oracle::legendre_explicit(l, m, th[j]);
          expect += pbar * (c(l, m) * std::cos(m * ph[k]) + s(l, m) * std::sin(m * ph[k]));
        }
      }
      CHECK(field(j, k).real() == doctest::Approx(expect).epsilon(1e-11));
    }
  }
  auto [c2, s2] = unpack_real_pair(packed);
  for (int l = 0; l <= 7; ++l) {
    for (int m = 0; m <= l; ++m) {
      CHECK(c2(l, m) == doctest::Approx(c(l, m)).epsilon(1e-14));
      CHECK(s2(l, m) == doctest::Approx(s(l, m)).epsilon(1e-14));
    }
  }
  TriangularTable bad(3);
  bad(2, 0) = 1e-3;
  CHECK_THROWS_AS(pack_real_pair(c, bad, 4), MalformedInput);
}

TEST_CASE("HarmonicCoeffs invariants") {
  CHECK_THROWS_AS(HarmonicCoeffs(3, Eigen::VectorXcd::Zero(8)), MalformedInput);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v[index(1, 1)] = cplx(1.0, 2.0);
  CHECK_THROWS_AS(HarmonicCoeffs(2, v, true), MalformedInput);
  v[index(1, -1)] = -std::conj(v[index(1, 1)]);
  const HarmonicCoeffs ok(2, v, true);
  CHECK(ok.conjugate_symmetry_residual() == 0.0);
  const HarmonicCoeffs up = ok.truncated(4);
  CHECK(up.bandlimit() == 4);
  CHECK(up(1, 1) == v[index(1, 1)]);
  CHECK(up(3, 0) == 0.0);
}

TEST_CASE("GridField validation") {
  CHECK_THROWS_AS(GridField({0.2, 0.1}, {0.0}, RowMatrixXd::Zero(2, 1)), MalformedInput);
  CHECK_THROWS_AS(GridField({0.1, 0.2}, {0.0}, RowMatrixXd::Zero(3, 1)), MalformedInput);
  RowMatrixXd nan = RowMatrixXd::Zero(1, 1);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(GridField({0.1}, {0.0}, nan), MalformedInput);
}
