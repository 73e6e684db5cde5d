#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slepian/errors.hpp"
#include "slepian/sh_core.hpp"

namespace slepian {

struct Epoch {
  int year = 0;
  int month = 0;

  auto operator<=>(const Epoch&) const = default;

  // Mid-month in decimal years.
  double decimal_year() const { return year + (month - 0.5) / 12.0; }
  Epoch next() const { return month == 12 ? Epoch{year + 1, 1} : Epoch{year, month + 1}; }
  std::string str() const;
  // "YYYY-MM"
  static Epoch parse(std::string_view text);
};

// Epoch from a file name following the `*-YYYYMM*` convention.
std::optional<Epoch> epoch_from_filename(std::string_view filename);

struct StokesEpoch {
  Epoch epoch;
  int lmax = 0;
  TriangularTable c;
  TriangularTable s;
};

// Level-2 style text: records are lines starting with the token GRCOF2
// followed by degree, order, C, S (further tokens ignored). Everything else
// is header chatter.
StokesEpoch parse_stokes(std::string_view text, Epoch epoch);
StokesEpoch load_stokes(const std::filesystem::path& path,
                        std::optional<Epoch> epoch_override = std::nullopt);
std::string serialize_stokes(const StokesEpoch& stokes);

struct GridEpoch {
  Epoch epoch;
  GridField field;
  // Source axes in degrees, one entry per colatitude row / longitude column.
  std::vector<double> lat_deg;
  std::vector<double> lon_deg;
  // Cells that carried the NA sentinel and were set to zero.
  int missing = 0;
};

// CSV with header `lat,lon,value`, lat in [-90, 90], lon in [0, 360), value
// in kg/m^2 or the sentinel NA. Lines starting with `#` are ignored. Rows
// may come in any order but must form a complete rectangular grid.
GridEpoch parse_grid(std::string_view text, Epoch epoch, Unit unit = Unit::kg_per_m2);
GridEpoch load_grid(const std::filesystem::path& path,
                    std::optional<Epoch> epoch_override = std::nullopt,
                    Unit unit = Unit::kg_per_m2);

// Writes `lat,lon,value` rows. When the degree axes are empty they are
// derived from the field's radians. A `# unit: ...` line is written first
// when `unit_comment` is set.
std::string serialize_grid(const GridField& field, std::span<const double> lat_deg = {},
                           std::span<const double> lon_deg = {}, bool unit_comment = false);

template <typename Item>
struct EpochSeries {
  std::vector<Item> items;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }
};

using StokesSeries = EpochSeries<StokesEpoch>;
using GridSeries = EpochSeries<GridEpoch>;

// Sorts by epoch; throws SeriesError on duplicate epochs, and for grids on
// axes that differ between epochs.
StokesSeries make_series(std::vector<StokesEpoch> items);
GridSeries make_series(std::vector<GridEpoch> items);

StokesSeries load_stokes_dir(const std::filesystem::path& dir);
GridSeries load_grid_dir(const std::filesystem::path& dir);

// Subtracts the across-epoch mean of every coefficient or cell. Needs at
// least two epochs of identical shape.
StokesSeries temporal_anomalies(const StokesSeries& series);
GridSeries temporal_anomalies(const GridSeries& series);

}  // namespace slepian
