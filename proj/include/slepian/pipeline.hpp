#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "slepian/execution.hpp"
#include "slepian/ingest.hpp"
#include "slepian/region_window.hpp"
#include "slepian/sh_core.hpp"

namespace slepian {

struct PhysicalConstants {
  double earth_radius_m = 6371008.0;
  double earth_density = 5517.0;  // kg/m^3
  double water_density = 1000.0;  // kg/m^3
};

class LoveNumbers {
 public:
  LoveNumbers() = default;
  // Degrees 0..n-1. Throws ConfigurationError when |k'_l| >= 1 for l >= 1 or
  // the magnitudes grow again beyond degree 10.
  explicit LoveNumbers(std::vector<double> kprime);

  // CSV `degree,kprime` with `#` comments; degrees must be 0, 1, 2, ...
  static LoveNumbers parse(std::string_view text);
  static LoveNumbers load(const std::filesystem::path& path);

  int size() const noexcept { return static_cast<int>(kprime_.size()); }
  double operator[](int l) const { return kprime_.at(static_cast<std::size_t>(l)); }

 private:
  std::vector<double> kprime_;
};

class SmoothingSpec {
 public:
  explicit SmoothingSpec(double kappa = 200.0);
  double kappa() const noexcept { return kappa_; }

 private:
  double kappa_;
};

// I_{l+1/2}(kappa) / I_{1/2}(kappa).
double bessel_ratio(int l, double kappa);
// The same ratio for l = 0 .. count-1.
std::vector<double> bessel_ratios(int count, double kappa);

HarmonicCoeffs smooth(const HarmonicCoeffs& c, const SmoothingSpec& smoothing);

// (a rho_a / 3) (2l+1) / (1 + k'_l) for l < bandlimit.
std::vector<double> degree_weights(int bandlimit, const LoveNumbers& love,
                                   const PhysicalConstants& pc);

GridField surface_density(const HarmonicCoeffs& c, const LoveNumbers& love,
                          const PhysicalConstants& pc, std::span<const double> thetas,
                          std::span<const double> phis, Execution exec = Execution::parallel);

struct EwhField {
  EwhField(Epoch epoch, GridField field);

  Epoch epoch;
  GridField field;
};

EwhField to_ewh(const GridField& sigma, const PhysicalConstants& pc, Epoch epoch = {});

std::vector<EwhField> gldas_variation(const GridSeries& series, int bandlimit,
                                      const SmoothingSpec& smoothing, const PhysicalConstants& pc,
                                      Execution exec = Execution::parallel);

// Real part of the window synthesized on the grid and scaled to unit mean
// over the region.
GridField window_on_grid(const WindowFunction& window, const Region& region,
                         std::span<const double> thetas, std::span<const double> phis,
                         Execution exec = Execution::parallel);

EwhField localize(const EwhField& f, const GridField& window_grid);
// Uses the region stored in the window.
EwhField localize(const EwhField& f, const WindowFunction& window);

EwhField gws(const EwhField& tws, const EwhField& swe, const EwhField& sms);

// sin(theta)-weighted mean over cells whose centres lie in the region.
double regional_mean(const GridField& f, const Region& region);
double regional_mean(const EwhField& f, const Region& region);

// Integral of W f over the sphere divided by the integral of W.
double window_weighted_mean(const GridField& f, const GridField& window_grid);

enum class MeanMode { region, window_global };

struct PipelineConfig {
  int bandlimit = 61;
  SmoothingSpec smoothing{};
  LoveNumbers love;
  PhysicalConstants constants{};
  MeanMode mean_mode = MeanMode::region;
  std::optional<Epoch> snapshot;
  Execution exec = Execution::parallel;
};

struct MonthlyRecord {
  Epoch epoch;
  double gws = 0.0;
  double tws = 0.0;
  double swe = 0.0;
  double sms = 0.0;
};

struct Snapshot {
  Epoch epoch;
  GridField tws, swe, sms, gws;
};

struct PipelineResult {
  std::vector<MonthlyRecord> records;
  // Months present in some input but not in all of them.
  std::vector<Epoch> dropped;
  std::optional<Snapshot> snapshot;
};

// Full monthly chain on the intersection of the input epochs. Inputs are raw
// series; temporal means are removed over the common months.
PipelineResult run_monthly(const StokesSeries& stokes, const GridSeries& swe,
                           const GridSeries& sms, const WindowFunction& window,
                           const Region& region, const PipelineConfig& config);

std::string format_series_csv(const std::vector<MonthlyRecord>& records);

}  // namespace slepian
