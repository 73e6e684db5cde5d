#pragma once

// Straightforward single-threaded versions of the fast kernels, used to check
// the parallel paths and as the baseline in benchmarks.

#include <span>

#include <Eigen/Core>

#include "slepian/region_window.hpp"
#include "slepian/sh_core.hpp"

namespace slepian::reference {

// Pointwise sum of c_lm Y_l^m at every grid node.
RowMatrixXcd synthesis(const HarmonicCoeffs& c, std::span<const double> thetas,
                       std::span<const double> phis);

// Quadrature sum of g conj(Y_l^m) over every grid node, one (l, m) at a time.
HarmonicCoeffs analysis(const GridField& g, int bandlimit);

// Every kernel entry from the Fourier double sum, box by box, no symmetry.
Eigen::MatrixXcd kernel(const Region& region, int bandlimit);

Eigen::VectorXcd matvec(const Eigen::MatrixXcd& k, const Eigen::VectorXcd& f);

}  // namespace slepian::reference
