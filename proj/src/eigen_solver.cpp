#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Cholesky>

#include "slepian/errors.hpp"
#include "slepian/region_window.hpp"

namespace slepian {

namespace {

struct Iterate {
  Eigen::VectorXcd f;
  double lambda = 0.0;
  double residual = 0.0;
};

Iterate evaluate(const Eigen::MatrixXcd& k, Eigen::VectorXcd f, Execution exec) {
  Iterate it;
  const Eigen::VectorXcd kf = kernel_apply(k, f, exec);
  it.lambda = f.dot(kf).real();
  it.residual = (kf - it.lambda * f).norm();
  it.f = std::move(f);
  return it;
}

double gershgorin_bound(const Eigen::MatrixXcd& k) {
  double bound = 0.0;
  for (Eigen::Index j = 0; j < k.cols(); ++j) bound = std::max(bound, k.col(j).cwiseAbs().sum());
  return bound;
}

// (-1)^m conj(f[l,-m]): maps the coefficients of g to those of conj(g).
Eigen::VectorXcd conjugate_mirror(const Eigen::VectorXcd& f, int L) {
  Eigen::VectorXcd out(f.size());
  for (int l = 0; l < L; ++l) {
    for (int m = -l; m <= l; ++m) {
      const double sign = (std::abs(m) % 2 == 0) ? 1.0 : -1.0;
      out[l * l + l + m] = sign * std::conj(f[l * l + l - m]);
    }
  }
  return out;
}

void fix_phase(Eigen::VectorXcd& f, int L) {
  const double scale = f.cwiseAbs().maxCoeff();
  cplx anchor = f[0];
  if (std::abs(anchor) <= 1e-12 * scale) {
    anchor = 0.0;
    for (int l = 1; l < L && anchor == 0.0; ++l) {
      if (std::abs(f[l * l + l]) > 1e-8 * scale) anchor = f[l * l + l];
    }
    if (anchor == 0.0) {
      Eigen::Index idx = 0;
      f.cwiseAbs().maxCoeff(&idx);
      anchor = f[idx];
    }
  }
  f *= std::conj(anchor) / std::abs(anchor);
}

}  // namespace

WindowFunction solve_max_concentration(const ConcentrationKernel& kernel,
                                       const EigenOptions& options) {
  const auto& k = kernel.entries();
  const Eigen::Index n = k.rows();
  const int L = kernel.bandlimit();
  const double scale = std::max(k.cwiseAbs().maxCoeff(), 1e-300);
  if (kernel.hermitian_residual() > 1e-10 * std::max(scale, 1.0)) {
    throw MalformedInput("kernel is not Hermitian");
  }
  const Execution exec = options.exec;

  Eigen::VectorXcd seed = k.col(0);
  if (seed.norm() == 0.0) seed = Eigen::VectorXcd::Ones(n);
  seed.normalize();

  // Operator applied each step: either K itself or the shift-inverted K.
  std::optional<Eigen::LLT<Eigen::MatrixXcd>> factor;
  double shift = 0.0;
  if (options.method == EigenMethod::shift_invert) {
    const double bound = gershgorin_bound(k);
    std::vector<double> candidates;
    if (bound > 1.0) candidates.push_back(1.0);
    candidates.push_back(bound);
    for (double upper : candidates) {
      for (double rel : {1e-8, 1e-6, 1e-4}) {
        shift = upper + rel * std::max(upper, 1e-300);
        Eigen::MatrixXcd shifted = -k;
        shifted.diagonal().array() += shift;
        factor.emplace(shifted);
        if (factor->info() == Eigen::Success) break;
        factor.reset();
      }
      if (factor) break;
    }
    if (!factor) throw ConvergenceError("shifted kernel could not be factored", 0.0, 0);
  }
  auto step = [&](const Eigen::VectorXcd& f) -> Eigen::VectorXcd {
    if (factor) return factor->solve(f);
    return kernel_apply(k, f, exec);
  };

  Iterate cur = evaluate(k, seed, exec);
  int iterations = 0;
  bool converged = false;
  double previous = cur.lambda;
  for (; iterations < options.max_iterations; ++iterations) {
    Eigen::VectorXcd next = step(cur.f);
    const double norm = next.norm();
    if (norm == 0.0) break;
    cur = evaluate(k, next / norm, exec);
    const double change = std::abs(cur.lambda - previous);
    previous = cur.lambda;
    if (change < options.eigenvalue_tolerance * std::abs(cur.lambda) &&
        cur.residual < options.residual_tolerance) {
      converged = true;
      ++iterations;
      break;
    }
    if (cur.lambda == 0.0 && cur.residual == 0.0) {
      converged = true;
      ++iterations;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "power iteration did not converge after " << iterations
        << " iterations (residual " << cur.residual << ")";
    throw ConvergenceError(msg.str(), cur.residual, iterations);
  }

  fix_phase(cur.f, L);
  // For kernels of real regions conj(window) is also an eigenvector, so the
  // symmetrized vector is the same eigenvector with round-off removed.
  {
    Eigen::VectorXcd sym = 0.5 * (cur.f + conjugate_mirror(cur.f, L));
    const double norm = sym.norm();
    if (norm > 0.5) {
      Iterate candidate = evaluate(k, sym / norm, exec);
      if (candidate.residual <= std::max(cur.residual, options.residual_tolerance)) {
        cur = std::move(candidate);
      }
    }
  }

  // Diagnostic only: estimate the next eigenvalue on the orthogonal
  // complement of the converged vector.
  double second = 0.0;
  if (n > 1) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(1.0 + 0.5 * std::sin(1.0 + i), std::cos(3.0 * i));
    double prev = -1.0;
    for (int t = 0; t < 300; ++t) {
      v -= cur.f * cur.f.dot(v);
      const double norm = v.norm();
      if (norm == 0.0) break;
      v /= norm;
      second = v.dot(kernel_apply(k, v, exec)).real();
      if (std::abs(second - prev) < 1e-14 * std::max(1.0, std::abs(second))) break;
      prev = second;
      v = step(v);
    }
  }

  WindowFunction w;
  const bool real = HarmonicCoeffs(L, cur.f).conjugate_symmetry_residual() <= 1e-12;
  w.coeffs = HarmonicCoeffs(L, cur.f, real);
  w.lambda = std::clamp(cur.lambda, 0.0, 1.0);
  w.iterations = iterations;
  w.residual = cur.residual;
  w.gap_estimate = cur.lambda - second;
  if (n > 1 && w.gap_estimate < options.degeneracy_gap) {
    std::ostringstream msg;
    msg << "near-degenerate dominant eigenvalue: estimated gap " << w.gap_estimate;
    w.warnings.push_back(msg.str());
  }
  return w;
}

}  // namespace slepian
