#include "slepian/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>

#include "text_format.hpp"

namespace slepian {

std::string Epoch::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

Epoch Epoch::parse(std::string_view text) {
  static const std::regex pattern(R"((\d{4})-(\d{2}))");
  std::cmatch match;
  if (!std::regex_match(text.begin(), text.end(), match, pattern)) {
    throw ParameterError("expected an epoch as YYYY-MM, got '" + std::string(text) + "'");
  }
  Epoch e{std::stoi(match[1].str()), std::stoi(match[2].str())};
  if (e.month < 1 || e.month > 12) throw ParameterError("month out of range in " + std::string(text));
  return e;
}

std::optional<Epoch> epoch_from_filename(std::string_view filename) {
  static const std::regex pattern(R"(-(\d{4})(\d{2})(?!\d))");
  std::cmatch match;
  if (!std::regex_search(filename.begin(), filename.end(), match, pattern)) return std::nullopt;
  Epoch e{std::stoi(match[1].str()), std::stoi(match[2].str())};
  if (e.month < 1 || e.month > 12) return std::nullopt;
  return e;
}

namespace {

std::optional<double> parse_fortran_double(std::string_view token) {
  std::string s(token);
  std::replace(s.begin(), s.end(), 'D', 'E');
  std::replace(s.begin(), s.end(), 'd', 'e');
  return text::parse_double(s);
}

Epoch resolve_epoch(const std::filesystem::path& path, std::optional<Epoch> epoch_override) {
  if (epoch_override) return *epoch_override;
  const auto e = epoch_from_filename(path.filename().string());
  if (!e) {
    throw ParseError("cannot infer epoch from file name " + path.filename().string() +
                         " (expected *-YYYYMM*)",
                     0);
  }
  return *e;
}

}  // namespace

StokesEpoch parse_stokes(std::string_view content, Epoch epoch) {
  struct Record {
    int l, m;
    double c, s;
    int line;
  };
  std::vector<Record> records;
  int lmax = -1;
  text::for_each_line(content, [&](int line_no, std::string_view line) {
    const auto tokens = text::split_whitespace(line);
    if (tokens.empty() || tokens[0] != "GRCOF2") return;
    if (tokens.size() < 5) throw ParseError("GRCOF2 record needs degree, order, C, S", line_no);
    const auto l = text::parse_int(tokens[1]);
    const auto m = text::parse_int(tokens[2]);
    if (!l || !m) throw ParseError("non-integer degree or order", line_no);
    const auto c = parse_fortran_double(tokens[3]);
    const auto s = parse_fortran_double(tokens[4]);
    if (!c || !s) throw ParseError("non-numeric coefficient", line_no);
    if (*l < 0 || *m < 0 || *m > *l || *l >= 100000) {
      throw ParseError("invalid degree/order pair", line_no);
    }
    if (!std::isfinite(*c) || !std::isfinite(*s)) throw ParseError("non-finite coefficient", line_no);
    if (*m == 0 && *s != 0.0) throw ParseError("S coefficient of order 0 must be zero", line_no);
    records.push_back({static_cast<int>(*l), static_cast<int>(*m), *c, *s, line_no});
    lmax = std::max(lmax, static_cast<int>(*l));
  });
  if (records.empty()) throw ParseError("no GRCOF2 records", 0);

  StokesEpoch out;
  out.epoch = epoch;
  out.lmax = lmax;
  out.c = TriangularTable(lmax);
  out.s = TriangularTable(lmax);
  std::vector<int> seen(static_cast<std::size_t>((lmax + 1) * (lmax + 2) / 2), 0);
  for (const auto& r : records) {
    int& first = seen[static_cast<std::size_t>(r.l * (r.l + 1) / 2 + r.m)];
    if (first != 0) {
      throw ParseError("duplicate record for (" + std::to_string(r.l) + ", " +
                           std::to_string(r.m) + "), first seen on line " + std::to_string(first),
                       r.line);
    }
    first = r.line;
    out.c(r.l, r.m) = r.c;
    out.s(r.l, r.m) = r.s;
  }
  if (seen[0] != 0 && !(std::abs(out.c(0, 0) - 1.0) < 0.5)) {
    throw ParseError("C00 = " + text::format_double(out.c(0, 0)) +
                         " fails the normalized-gravity sanity check",
                     seen[0]);
  }
  return out;
}

StokesEpoch load_stokes(const std::filesystem::path& path, std::optional<Epoch> epoch_override) {
  const Epoch e = resolve_epoch(path, epoch_override);
  try {
    return parse_stokes(text::read_file(path.string()), e);
  } catch (const ParseError& err) {
    throw ParseError(path.string() + ": " + err.what(), err.line());
  }
}

std::string serialize_stokes(const StokesEpoch& stokes) {
  std::string out;
  out += "# epoch: " + stokes.epoch.str() + "\n";
  out += "# lmax: " + std::to_string(stokes.lmax) + "\n";
  out += "# record  degree order C S sigma_C sigma_S\n";
  for (int l = 0; l <= stokes.lmax; ++l) {
    for (int m = 0; m <= l; ++m) {
      out += "GRCOF2 ";
      out += std::to_string(l) + " " + std::to_string(m) + " ";
      out += text::format_double(stokes.c(l, m)) + " " + text::format_double(stokes.s(l, m));
      out += " 0 0\n";
    }
  }
  return out;
}

GridEpoch parse_grid(std::string_view content, Epoch epoch, Unit unit) {
  struct Cell {
    double lat, lon;
    std::optional<double> value;
    int line;
  };
  std::vector<Cell> cells;
  bool header = false;
  text::for_each_line(content, [&](int line_no, std::string_view line) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') return;
    if (!header) {
      if (line != "lat,lon,value") throw ParseError("expected header lat,lon,value", line_no);
      header = true;
      return;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw ParseError("expected lat,lon,value", line_no);
    const auto lat = text::parse_double(f[0]);
    const auto lon = text::parse_double(f[1]);
    if (!lat || !lon) throw ParseError("non-numeric coordinate", line_no);
    if (*lat < -90.0 || *lat > 90.0) throw ParseError("latitude out of range [-90, 90]", line_no);
    if (*lon < 0.0 || *lon >= 360.0) throw ParseError("longitude out of range [0, 360)", line_no);
    std::optional<double> value;
    const auto vtext = text::trim(f[2]);
    if (vtext != "NA") {
      value = text::parse_double(vtext);
      if (!value || !std::isfinite(*value)) throw ParseError("non-numeric value", line_no);
    }
    cells.push_back({*lat, *lon, value, line_no});
  });
  if (!header) throw ParseError("missing header lat,lon,value", 0);
  if (cells.empty()) throw ParseError("grid has no rows", 0);

  std::vector<double> lats, lons;
  for (const auto& c : cells) {
    lats.push_back(c.lat);
    lons.push_back(c.lon);
  }
  std::sort(lats.begin(), lats.end(), std::greater<>());
  lats.erase(std::unique(lats.begin(), lats.end()), lats.end());
  std::sort(lons.begin(), lons.end());
  lons.erase(std::unique(lons.begin(), lons.end()), lons.end());
  if (lats.size() * lons.size() != cells.size()) {
    // Either a duplicate or a hole; report duplicates precisely.
    std::map<std::pair<double, double>, int> where;
    for (const auto& c : cells) {
      auto [it, inserted] = where.emplace(std::make_pair(c.lat, c.lon), c.line);
      if (!inserted) {
        throw ParseError("duplicate cell, first seen on line " + std::to_string(it->second),
                         c.line);
      }
    }
    throw ParseError("ragged grid: " + std::to_string(cells.size()) + " cells for " +
                         std::to_string(lats.size()) + " latitudes x " +
                         std::to_string(lons.size()) + " longitudes",
                     0);
  }
  RowMatrixXd values = RowMatrixXd::Zero(static_cast<Eigen::Index>(lats.size()),
                                         static_cast<Eigen::Index>(lons.size()));
  std::vector<int> filled(lats.size() * lons.size(), 0);
  int missing = 0;
  for (const auto& c : cells) {
    const auto r = std::lower_bound(lats.begin(), lats.end(), c.lat, std::greater<>()) - lats.begin();
    const auto k = std::lower_bound(lons.begin(), lons.end(), c.lon) - lons.begin();
    int& slot = filled[static_cast<std::size_t>(r) * lons.size() + static_cast<std::size_t>(k)];
    if (slot != 0) throw ParseError("duplicate cell, first seen on line " + std::to_string(slot), c.line);
    slot = c.line;
    if (c.value) {
      values(r, k) = *c.value;
    } else {
      ++missing;
    }
  }
  std::vector<double> thetas(lats.size()), phis(lons.size());
  for (std::size_t j = 0; j < lats.size(); ++j) thetas[j] = (90.0 - lats[j]) * kPi / 180.0;
  for (std::size_t k = 0; k < lons.size(); ++k) phis[k] = lons[k] * kPi / 180.0;
  GridEpoch out;
  out.epoch = epoch;
  out.field = GridField(std::move(thetas), std::move(phis), std::move(values), unit);
  out.lat_deg = std::move(lats);
  out.lon_deg = std::move(lons);
  out.missing = missing;
  return out;
}

GridEpoch load_grid(const std::filesystem::path& path, std::optional<Epoch> epoch_override,
                    Unit unit) {
  const Epoch e = resolve_epoch(path, epoch_override);
  try {
    return parse_grid(text::read_file(path.string()), e, unit);
  } catch (const ParseError& err) {
    throw ParseError(path.string() + ": " + err.what(), err.line());
  }
}

std::string serialize_grid(const GridField& field, std::span<const double> lat_deg,
                           std::span<const double> lon_deg, bool unit_comment) {
  std::vector<double> lats(lat_deg.begin(), lat_deg.end());
  std::vector<double> lons(lon_deg.begin(), lon_deg.end());
  if (lats.empty()) {
    for (double t : field.thetas()) lats.push_back(90.0 - t * 180.0 / kPi);
  }
  if (lons.empty()) {
    for (double p : field.phis()) lons.push_back(p * 180.0 / kPi);
  }
  if (lats.size() != field.thetas().size() || lons.size() != field.phis().size()) {
    throw ConfigurationError("degree axes do not match the grid");
  }
  std::string out;
  if (unit_comment) out += "# unit: " + std::string(unit_name(field.unit())) + "\n";
  out += "lat,lon,value\n";
  for (std::size_t j = 0; j < lats.size(); ++j) {
    const std::string lat = text::format_double(lats[j]) + ",";
    for (std::size_t k = 0; k < lons.size(); ++k) {
      out += lat;
      out += text::format_double(lons[k]);
      out += ",";
      out += text::format_double(field.values()(static_cast<Eigen::Index>(j),
                                                static_cast<Eigen::Index>(k)));
      out += "\n";
    }
  }
  return out;
}

namespace {

template <typename Item>
void sort_and_check(std::vector<Item>& items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.epoch < b.epoch; });
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (!(items[i - 1].epoch < items[i].epoch)) {
      throw SeriesError("duplicate epoch " + items[i].epoch.str() + " in series");
    }
  }
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw MissingInput("input directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

StokesSeries make_series(std::vector<StokesEpoch> items) {
  sort_and_check(items);
  return StokesSeries{std::move(items)};
}

GridSeries make_series(std::vector<GridEpoch> items) {
  sort_and_check(items);
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (!items[i].field.same_axes(items[0].field)) {
      throw SeriesError("grid axes of " + items[i].epoch.str() + " differ from " +
                        items[0].epoch.str());
    }
  }
  return GridSeries{std::move(items)};
}

StokesSeries load_stokes_dir(const std::filesystem::path& dir) {
  std::vector<StokesEpoch> items;
  for (const auto& f : sorted_files(dir)) {
    if (!epoch_from_filename(f.filename().string())) continue;
    items.push_back(load_stokes(f));
  }
  return make_series(std::move(items));
}

GridSeries load_grid_dir(const std::filesystem::path& dir) {
  std::vector<GridEpoch> items;
  for (const auto& f : sorted_files(dir)) {
    if (!epoch_from_filename(f.filename().string())) continue;
    items.push_back(load_grid(f));
  }
  return make_series(std::move(items));
}

StokesSeries temporal_anomalies(const StokesSeries& series) {
  if (series.size() < 2) throw SeriesError("anomalies need at least two epochs");
  const int lmax = series.items.front().lmax;
  for (const auto& item : series.items) {
    if (item.lmax != lmax) {
      throw SeriesError("epoch " + item.epoch.str() + " has lmax " + std::to_string(item.lmax) +
                        ", expected " + std::to_string(lmax));
    }
  }
  // Accumulated as deviations from the first epoch.
  const double n = static_cast<double>(series.size());
  const auto& base = series.items.front();
  StokesSeries out = series;
  TriangularTable mean_c(lmax), mean_s(lmax);
  for (auto& item : out.items) {
    auto c = item.c.data();
    auto s = item.s.data();
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] -= base.c.data()[i];
      s[i] -= base.s.data()[i];
      mean_c.data()[i] += c[i] / n;
      mean_s.data()[i] += s[i] / n;
    }
  }
  for (auto& item : out.items) {
    auto c = item.c.data();
    auto s = item.s.data();
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] -= mean_c.data()[i];
      s[i] -= mean_s.data()[i];
    }
  }
  return out;
}

GridSeries temporal_anomalies(const GridSeries& series) {
  if (series.size() < 2) throw SeriesError("anomalies need at least two epochs");
  const auto& first = series.items.front().field;
  for (const auto& item : series.items) {
    if (!item.field.same_axes(first)) {
      throw SeriesError("grid shape of " + item.epoch.str() + " differs from the series");
    }
  }
  GridSeries out = series;
  RowMatrixXd mean = RowMatrixXd::Zero(first.values().rows(), first.values().cols());
  for (auto& item : out.items) {
    item.field.values() -= first.values();
    mean += item.field.values();
  }
  mean /= static_cast<double>(series.size());
  for (auto& item : out.items) item.field.values() -= mean;
  return out;
}

}  // namespace slepian
