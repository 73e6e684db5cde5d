#include <cmath>
#include <complex>
#include <fstream>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "slepian/errors.hpp"
#include "slepian/reference.hpp"
#include "slepian/region_window.hpp"
#include "slepian/synth.hpp"

using namespace slepian;
using boost::math::quadrature::gauss_kronrod;

namespace {


cplx numeric_q(int m, double a, double b) {
  auto re = [m](double t) { return std::cos(m * t) * std::sin(t); };
  auto im = [m](double t) { return std::sin(m * t) * std::sin(t); };
  return {gauss_kronrod<double, 61>::integrate(re, a, b, 15, 1e-15),
          gauss_kronrod<double, 61>::integrate(im, a, b, 15, 1e-15)};
}

cplx numeric_s(int m, double a, double b) {
  auto re = [m](double t) { return std::cos(m * t); };
  auto im = [m](double t) { return std::sin(m * t); };
  return {gauss_kronrod<double, 61>::integrate(re, a, b, 15, 1e-15),
          gauss_kronrod<double, 61>::integrate(im, a, b, 15, 1e-15)};
}

Region irb() { return load_region(std::string(SLEPIAN_DATA_DIR) + "/irb_44boxes.csv"); }

LatLonBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double t1 = u(rng) * kPi, t2 = u(rng) * kPi;
  double p1 = u(rng) * 2 * kPi, p2 = u(rng) * 2 * kPi;
  if (t1 > t2) std::swap(t1, t2);
  if (p1 > p2) std::swap(p1, p2);
  return LatLonBox(t1, t2 + 1e-3, p1, p2 + 1e-3 > 2 * kPi ? 2 * kPi : p2 + 1e-3);
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("box validation and containment") {
  CHECK_THROWS_AS(LatLonBox(1.0, 0.5, 0.0, 1.0), MalformedInput);
  CHECK_THROWS_AS(LatLonBox(0.0, 4.0, 0.0, 1.0), MalformedInput);
  CHECK_THROWS_AS(LatLonBox(0.0, 1.0, 1.0, 1.0), MalformedInput);
  const auto b = LatLonBox::from_degrees(0, 90, 60, 80);
  CHECK(b.theta2() == doctest::Approx(kPi / 2));
  CHECK(b.area() == doctest::Approx(20.0 * kPi / 180.0));
  CHECK(b.contains(0.5, 70 * kPi / 180));
  CHECK_FALSE(b.contains(0.5, 50 * kPi / 180));
  CHECK(Region::full_sphere().area() == doctest::Approx(4 * kPi));
  CHECK_THROWS_AS(Region({}), MalformedInput);
  CHECK_THROWS_AS(Region({LatLonBox(0, 1, 0, 1), LatLonBox(0.5, 1.5, 0.5, 1.5)}), MalformedInput);
  // Shared edges are not overlaps.
  CHECK_NOTHROW(Region({LatLonBox(0, 1, 0, 1), LatLonBox(1, 2, 0, 1)}));
}

TEST_CASE("q integral") {
  CHECK(std::abs(q_integral(0, 0, kPi) - cplx(2, 0)) < 1e-14);
  CHECK(std::abs(q_integral(1, 0, kPi) - cplx(0, kPi / 2)) < 1e-14);
  CHECK(std::abs(q_integral(3, 0.2, 1.1) - numeric_q(3, 0.2, 1.1)) < 1e-12);
  for (int m = -12; m <= 12; ++m) {
    CAPTURE(m);
    CHECK(std::abs(q_integral(m, 0.3, 2.9) - numeric_q(m, 0.3, 2.9)) < 1e-12);
    CHECK(std::abs(q_integral(m, 1.0, 1.0 + 1e-7) - numeric_q(m, 1.0, 1.0 + 1e-7)) < 1e-12);
  }
}

TEST_CASE("s integral") {
  CHECK(std::abs(s_integral(0, 0.5, 2.0) - cplx(1.5, 0)) < 1e-15);
  CHECK(std::abs(s_integral(4, 0, 2 * kPi)) < 1e-14);
  CHECK(std::abs(s_integral(-2, 0.3, 1.7) - numeric_s(-2, 0.3, 1.7)) < 1e-13);
  for (int m = -10; m <= 10; ++m) {
    CHECK(std::abs(s_integral(m, 0.1, 5.0) - numeric_s(m, 0.1, 5.0)) < 1e-13);
  }
}

TEST_CASE("Fourier coefficients of Legendre functions") {
  const auto w = wigner_table(12);
  CHECK(std::abs(f_coeff(0, 0, 0, w) - cplx(0.2820947917738781, 0)) < 1e-15);
  CHECK(std::abs(f_coeff(1, 0, 0, w)) < 1e-15);
  CHECK_THROWS_AS(f_coeff(3, 4, 0, w), InvalidOrder);
  CHECK_THROWS_AS(f_coeff(3, 0, -4, w), InvalidOrder);
  for (int l = 0; l < 12; ++l) {
    for (int m = -l; m <= l; ++m) {
      const double sign = (m < 0 && (m % 2)) ? -1.0 : 1.0;
      for (int mp = -l; mp <= l; ++mp) {
        CAPTURE(l);
        CAPTURE(m);
        CAPTURE(mp);
        const cplx expect = sign * oracle::legendre_fourier(l, mp, std::abs(m));
        CHECK(std::abs(f_coeff(l, mp, m, w) - expect) < 1e-12);
      }
    }
  }
}

TEST_CASE("single box kernel entries against quadrature") {
  const auto box = LatLonBox(0.4, 1.3, 0.7, 2.2);
  const auto w = wigner_table(6);
  const auto k = kernel_box(box, 6, w);
  const cplx expect = quadrature_kernel_entry(2, 1, 3, -1, box);
  CHECK(std::abs(k.entries()(index(2, 1), index(3, -1)) - expect) < 1e-9);
  CHECK(k.entries()(0, 0).real() == doctest::Approx(box.area() / (4 * kPi)).epsilon(1e-13));
  CHECK(k.hermitian_residual() < 1e-14);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const auto b = random_box(rng);
    const auto kb = kernel_box(b, 5, wigner_table(5));
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
      const auto [l, m] = degree_order(i);
      for (int j = 0; j < 25; ++j) {
        const auto [p, q] = degree_order(j);
        worst = std::max(worst, std::abs(kb.entries()(i, j) - quadrature_kernel_entry(l, m, p, q, b)));
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("full sphere kernel is the identity") {
  const auto k = kernel_box(LatLonBox(0, kPi, 0, 2 * kPi), 8, wigner_table(8));
  CHECK(max_abs(k.entries() - Eigen::MatrixXcd::Identity(64, 64)) < 1e-10);
  const Region halves({LatLonBox(0, kPi, 0, 2.5), LatLonBox(0, kPi, 2.5, 2 * kPi)});
  const auto kr = kernel_region(halves, 6);
  CHECK(max_abs(kr.entries() - Eigen::MatrixXcd::Identity(36, 36)) < 1e-9);
}

TEST_CASE("region kernel is the sum of box kernels") {
  const Region r({LatLonBox(0.2, 0.9, 0.1, 1.0), LatLonBox(0.9, 1.4, 0.1, 0.6)});
  const auto w = wigner_table(7);
  const auto k1 = kernel_box(r.boxes()[0], 7, w);
  const auto k2 = kernel_box(r.boxes()[1], 7, w);
  const auto kr = kernel_region(r, 7);
  CHECK(max_abs(kr.entries() - k1.entries() - k2.entries()) < 1e-14);
  const Region single({r.boxes()[0]});
  CHECK(max_abs(kernel_region(single, 7).entries() - k1.entries()) == 0.0);
}

TEST_CASE("kernel matches the direct reference") {
  const Region r({LatLonBox(0.5, 1.2, 3.0, 4.0), LatLonBox(1.2, 2.0, 3.5, 4.5)});
  const auto fast = kernel_region(r, 9);
  const auto slow = reference::kernel(r, 9);
  CHECK(max_abs(fast.entries() - slow) < 1e-12);
  const auto serial = kernel_region(r, 9, Execution::serial);
  CHECK(max_abs(fast.entries() - serial.entries()) == 0.0);
}

TEST_CASE("kernel is Hermitian positive semidefinite") {
  const auto r = irb();
  const auto k = kernel_region(r, 8);
  CHECK(k.hermitian_residual() < 1e-14);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXcd v(64);
    for (auto& x : v) x = {g(rng), g(rng)};
    const double rq = (v.adjoint() * k.entries() * v)(0, 0).real() / v.squaredNorm();
    CHECK(rq >= -1e-14);
    CHECK(rq <= 1.0 + 1e-14);
  }
}

TEST_CASE("Shannon number equals the trace") {
  const auto r = irb();
  CHECK(r.boxes().size() == 44);
  const auto k = kernel_region(r, 10);
  const double shannon = 100.0 * r.area() / (4 * kPi);
  CHECK(std::abs(k.trace().real() - shannon) / shannon < 1e-6);
}

TEST_CASE("kernel cache round trip") {
  oracle::TempDir dir("kcache");
  const auto k = kernel_region(irb(), 6);
  save_kernel(k, dir / "k.bin");
  const auto back = load_kernel(dir / "k.bin");
  CHECK(back.bandlimit() == 6);
  CHECK(max_abs(back.entries() - k.entries()) == 0.0);
  const auto size = std::filesystem::file_size(dir / "k.bin");
  CHECK(size == 8 + 4 + 36 * 37 / 2 * 16);
  CHECK_THROWS_AS(load_kernel(dir / "missing.bin"), MissingInput);
  {
    std::ofstream out(dir / "bad.bin", std::ios::binary);
    out << "NOTAKERN";
  }
  CHECK_THROWS(load_kernel(dir / "bad.bin"));
}

TEST_CASE("dominant eigenpair") {
  SUBCASE("identity") {
    const auto k = kernel_region(Region::full_sphere(), 5);
    const auto w = solve_max_concentration(k);
    CHECK(std::abs(w.lambda - 1.0) < 1e-12);
    CHECK(w.coeffs.values().norm() == doctest::Approx(1.0));
    const auto again = solve_max_concentration(k);
    CHECK((again.coeffs.values() - w.coeffs.values()).norm() == 0.0);
  }
  SUBCASE("polar cap") {
    const Region cap({LatLonBox(0, 0.6, 0, 2 * kPi)});
    const auto k = kernel_region(cap, 8);
    const auto [lam, vec] = dense_eig_max(k.entries());
    for (auto method : {EigenMethod::shift_invert, EigenMethod::power}) {
      EigenOptions opt;
      opt.method = method;
      const auto w = solve_max_concentration(k, opt);
      CHECK(std::abs(w.lambda - lam) < 1e-9);
      CHECK(std::abs(std::abs(vec.dot(w.coeffs.values())) - 1.0) < 1e-6);
    }
  }
  SUBCASE("IRB Rayleigh quotient and spatial ratio") {
    const auto r = irb();
    const auto k = kernel_region(r, 10);
    auto w = solve_max_concentration(k);
    const auto& f = w.coeffs.values();
    const double rq = (f.adjoint() * k.entries() * f)(0, 0).real() / f.squaredNorm();
    CHECK(std::abs(rq - w.lambda) < 1e-12);
    CHECK(w.coeffs(0, 0).imag() == doctest::Approx(0.0));
    CHECK(w.coeffs(0, 0).real() > 0.0);
    w.region = r;
    CHECK(std::abs(concentration_ratio_spatial(w, r) - w.lambda) < 1e-6);
  }
  SUBCASE("iteration cap") {
    const Region cap({LatLonBox(0, 0.6, 0, 2 * kPi)});
    EigenOptions opt;
    opt.method = EigenMethod::power;
    opt.max_iterations = 2;
    CHECK_THROWS_AS(solve_max_concentration(kernel_region(cap, 8), opt), ConvergenceError);
  }
}

TEST_CASE("random PSD kernels against Jacobi") {
  std::mt19937_64 rng(3);
  for (int L : {3, 5, 7}) {
    const auto m = oracle::random_psd(L * L, rng);
    const auto [lam, vec] = dense_eig_max(m);
    const auto w = solve_max_concentration(ConcentrationKernel(L, m));
    CHECK(std::abs(w.lambda - lam) < 1e-9);
  }
}

TEST_CASE("kernel application parity") {
  std::mt19937_64 rng(9);
  const auto m = oracle::random_psd(49, rng);
  Eigen::VectorXcd f = Eigen::VectorXcd::Random(49);
  const auto a = kernel_apply(m, f, Execution::parallel);
  const auto b = kernel_apply(m, f, Execution::serial);
  const auto c = reference::matvec(m, f);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() < 1e-12);
}

TEST_CASE("spatial concentration ratio") {
  const auto box = LatLonBox(0.3, 1.1, 1.0, 2.0);
  const Region r({box});
  HarmonicCoeffs c(6, true);
  c(0, 0) = 1.0;
  CHECK(concentration_ratio_spatial(c, r) == doctest::Approx(box.area() / (4 * kPi)).epsilon(1e-12));
  std::mt19937_64 rng(2);
  const auto rc = oracle::random_real_coeffs(6, rng);
  CHECK(concentration_ratio_spatial(rc, Region::full_sphere()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("region files") {
  oracle::TempDir dir("region");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  const auto one = load_region(write("one.csv", "# test\n0,90,60,80\n"));
  CHECK(one.boxes().size() == 1);
  CHECK(one.boxes()[0].phi1() == doctest::Approx(60 * kPi / 180));
  try {
    load_region(write("overlap.csv", "0,90,60,80\n# c\n10,20,70,90\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    load_region(write("bad.csv", "0,90,60,80\n0,x,1,2\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(load_region(write("bounds.csv", "0,190,60,80\n")), ParseError);
  CHECK_THROWS_AS(load_region(write("cols.csv", "0,90,60\n")), ParseError);
  CHECK_THROWS_AS(load_region(write("empty.csv", "# nothing\n")), ParseError);
  CHECK_THROWS_AS(load_region(dir / "absent.csv"), MissingInput);
  CHECK(irb().boxes().size() == 44);
}

TEST_CASE("window file round trip") {
  oracle::TempDir dir("window");
  const auto r = irb();
  auto w = solve_max_concentration(kernel_region(r, 6));
  w.region = r;
  save_window(w, dir / "w.txt");
  const auto back = load_window(dir / "w.txt");
  CHECK(back.lambda == w.lambda);
  CHECK((back.coeffs.values() - w.coeffs.values()).norm() == 0.0);
  REQUIRE(back.region.has_value());
  CHECK(back.region->boxes().size() == 44);
}
