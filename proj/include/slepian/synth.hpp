#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "slepian/ingest.hpp"
#include "slepian/pipeline.hpp"
#include "slepian/region_window.hpp"

namespace slepian {

struct SyntheticScenario {
  int bandlimit = 16;
  int months = 120;
  double trend_m_per_yr = -0.02;
  double seasonal_amplitude_m = 0.05;
  double noise_rms_m = 0.01;
  std::uint64_t seed = 1;
  Epoch start{2005, 1};
  double grid_step_deg = 1.0;

  // Throws ParameterError on out-of-range values (months < 24 included).
  void validate() const;
};

// key=value lines, `#` comments. Unknown keys are errors.
SyntheticScenario parse_scenario(std::string_view text);
SyntheticScenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const SyntheticScenario& s);

struct GroundTruth {
  Epoch epoch;
  double gws = 0.0;
  double tws = 0.0;
  double swe = 0.0;
  double sms = 0.0;
};

struct ScenarioData {
  StokesSeries stokes;
  GridSeries swe;
  GridSeries sms;
  std::vector<GroundTruth> truth;
  // Fraction of the region indicator's energy below the bandlimit.
  double representability = 0.0;
  std::vector<std::string> warnings;
};

// Spatial pattern: the band-limited region indicator scaled to unit regional
// mean. GWS carries the trend and an annual cosine centred on the middle of
// the record, SWE and SMS annual terms of half the amplitude shifted by
// +-120 degrees; white noise is added to TWS per cell.
// Stokes files are the exact inverse of the density chain (no smoothing)
// plus a static background field.
ScenarioData make_scenario(const SyntheticScenario& s, const Region& region,
                           const LoveNumbers& love, const PhysicalConstants& pc = {});

// Writes stokes/GSM-YYYYMM.txt, swe/SWE-YYYYMM.csv, sms/SMS-YYYYMM.csv and
// ground_truth.csv under `dir`.
void write_scenario(const ScenarioData& data, const std::filesystem::path& dir);

// int_box conj(Y_l^m) Y_p^q sin(theta) dtheta dphi by adaptive
// Gauss-Kronrod quadrature, independent of the closed-form kernel.
cplx quadrature_kernel_entry(int l, int m, int p, int q, const LatLonBox& box);

// Top eigenpair of a Hermitian matrix by cyclic Jacobi rotations on its real
// symmetric embedding.
std::pair<double, Eigen::VectorXcd> dense_eig_max(const Eigen::MatrixXcd& k);

// Ordinary least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace slepian
