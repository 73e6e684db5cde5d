#include "slepian/reference.hpp"

#include <cmath>

namespace slepian::reference {

RowMatrixXcd synthesis(const HarmonicCoeffs& c, std::span<const double> thetas,
                       std::span<const double> phis) {
  const int L = c.bandlimit();
  RowMatrixXcd out(static_cast<Eigen::Index>(thetas.size()), static_cast<Eigen::Index>(phis.size()));
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    for (std::size_t k = 0; k < phis.size(); ++k) {
      const SphericalPoint p(thetas[j], phis[k]);
      cplx sum = 0.0;
      for (int l = 0; l < L; ++l) {
        for (int m = -l; m <= l; ++m) sum += c(l, m) * ylm(l, m, p);
      }
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = sum;
    }
  }
  return out;
}

HarmonicCoeffs analysis(const GridField& g, int bandlimit) {
  const auto& thetas = g.thetas();
  const auto& phis = g.phis();
  const auto weights = ring_weights(thetas);
  const double dphi = 2.0 * kPi / static_cast<double>(phis.size());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(num_coeffs(bandlimit));
  for (int l = 0; l < bandlimit; ++l) {
    for (int m = -l; m <= l; ++m) {
      cplx sum = 0.0;
      for (std::size_t j = 0; j < thetas.size(); ++j) {
        for (std::size_t k = 0; k < phis.size(); ++k) {
          const SphericalPoint p(thetas[j], phis[k]);
          sum += weights[j] * dphi *
                 g.values()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
                 std::conj(ylm(l, m, p));
        }
      }
      v[index(l, m)] = sum;
    }
  }
  return HarmonicCoeffs(bandlimit, std::move(v));
}

Eigen::MatrixXcd kernel(const Region& region, int bandlimit) {
  const int L = bandlimit;
  const int n = num_coeffs(L);
  const WignerTable w(L);
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& box : region.boxes()) {
    for (int i = 0; i < n; ++i) {
      const auto [l, m] = degree_order(i);
      for (int j = 0; j < n; ++j) {
        const auto [p, q] = degree_order(j);
        cplx theta_sum = 0.0;
        for (int a = -l; a <= l; ++a) {
          const cplx fa = f_coeff(l, a, m, w);
          if (fa == 0.0) continue;
          for (int b = -p; b <= p; ++b) {
            const cplx fb = f_coeff(p, b, q, w);
            if (fb == 0.0) continue;
            theta_sum += fa * fb * q_integral(a + b, box.theta1(), box.theta2());
          }
        }
        k(i, j) += theta_sum * s_integral(q - m, box.phi1(), box.phi2());
      }
    }
  }
  return k;
}

Eigen::VectorXcd matvec(const Eigen::MatrixXcd& k, const Eigen::VectorXcd& f) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) y[i] += k(i, j) * f[j];
  }
  return y;
}

}  // namespace slepian::reference
