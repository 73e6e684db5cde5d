#include "slepian/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "parallel_for.hpp"
#include "text_format.hpp"

namespace slepian {

LoveNumbers::LoveNumbers(std::vector<double> kprime) : kprime_(std::move(kprime)) {
  if (kprime_.empty()) throw ConfigurationError("Love-number table is empty");
  for (std::size_t l = 0; l < kprime_.size(); ++l) {
    if (!std::isfinite(kprime_[l])) throw ConfigurationError("non-finite Love number");
    if (l >= 1 && !(std::abs(kprime_[l]) < 1.0)) {
      throw ConfigurationError("|k'_" + std::to_string(l) + "| must be below 1");
    }
    if (l > 10 && std::abs(kprime_[l]) > std::abs(kprime_[l - 1])) {
      throw ConfigurationError("Love-number magnitude grows at degree " + std::to_string(l));
    }
  }
}

LoveNumbers LoveNumbers::parse(std::string_view content) {
  std::vector<double> values;
  text::for_each_line(content, [&](int line_no, std::string_view line) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#' || line == "degree,kprime") return;
    const auto f = text::split(line, ',');
    if (f.size() != 2) throw ParseError("expected degree,kprime", line_no);
    const auto l = text::parse_int(f[0]);
    const auto k = text::parse_double(f[1]);
    if (!l || !k) throw ParseError("non-numeric Love-number row", line_no);
    if (*l != static_cast<long long>(values.size())) {
      throw ParseError("degrees must be consecutive from 0", line_no);
    }
    values.push_back(*k);
  });
  return LoveNumbers(std::move(values));
}

LoveNumbers LoveNumbers::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInput("Love-number file not found: " + path.string());
  }
  return parse(text::read_file(path.string()));
}

SmoothingSpec::SmoothingSpec(double kappa) : kappa_(kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be positive");
}

std::vector<double> bessel_ratios(int count, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be positive");
  if (count < 0) throw ParameterError("degree must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 0) return out;
  // rho[j] = I_{j+3/2} / I_{j+1/2} by downward recurrence
  //   rho_{nu-1} = 1 / (2 nu / x + rho_nu)
  // started from the uniform asymptotic estimate far above the last degree.
  const double x = kappa;
  const long top = count + 200 + static_cast<long>(std::min(std::ceil(x), 1e7));
  std::vector<double> rho(static_cast<std::size_t>(count));
  {
    const double nu = top + 1.5;
    double r = x / (nu + std::sqrt(nu * nu + x * x));
    for (long j = top; j >= 0; --j) {
      // r currently holds I_{j+5/2}/I_{j+3/2}; step to I_{j+3/2}/I_{j+1/2}.
      r = 1.0 / ((2.0 * j + 3.0) / x + r);
      if (j < count) rho[static_cast<std::size_t>(j)] = r;
    }
  }
  out[0] = 1.0;
  for (int l = 1; l < count; ++l) out[l] = out[l - 1] * rho[l - 1];
  return out;
}

double bessel_ratio(int l, double kappa) {
  if (l < 0) throw ParameterError("degree must be nonnegative");
  return bessel_ratios(l + 1, kappa)[static_cast<std::size_t>(l)];
}

HarmonicCoeffs smooth(const HarmonicCoeffs& c, const SmoothingSpec& smoothing) {
  const int L = c.bandlimit();
  const auto ratio = bessel_ratios(L, smoothing.kappa());
  Eigen::VectorXcd v = c.values();
  for (int l = 0; l < L; ++l) {
    for (int m = -l; m <= l; ++m) v[index(l, m)] *= ratio[static_cast<std::size_t>(l)];
  }
  return HarmonicCoeffs(L, std::move(v), c.real_field());
}

std::vector<double> degree_weights(int bandlimit, const LoveNumbers& love,
                                   const PhysicalConstants& pc) {
  if (bandlimit > love.size()) {
    throw ConfigurationError("bandlimit " + std::to_string(bandlimit) +
                             " exceeds the Love-number table (" + std::to_string(love.size()) +
                             " degrees)");
  }
  const double scale = pc.earth_radius_m * pc.earth_density / 3.0;
  std::vector<double> w(static_cast<std::size_t>(bandlimit));
  for (int l = 0; l < bandlimit; ++l) w[l] = scale * (2.0 * l + 1.0) / (1.0 + love[l]);
  return w;
}

GridField surface_density(const HarmonicCoeffs& c, const LoveNumbers& love,
                          const PhysicalConstants& pc, std::span<const double> thetas,
                          std::span<const double> phis, Execution exec) {
  const int L = c.bandlimit();
  const auto w = degree_weights(L, love, pc);
  Eigen::VectorXcd v = c.values();
  for (int l = 0; l < L; ++l) {
    for (int m = -l; m <= l; ++m) v[index(l, m)] *= w[static_cast<std::size_t>(l)];
  }
  GridField out = synthesis(HarmonicCoeffs(L, std::move(v), c.real_field()), thetas, phis, exec);
  out.set_unit(Unit::kg_per_m2);
  return out;
}

EwhField::EwhField(Epoch e, GridField f) : epoch(e), field(std::move(f)) {
  if (field.unit() != Unit::m_ewh) {
    throw UnitError("EWH field needs unit m-EWH, got " + std::string(unit_name(field.unit())));
  }
}

EwhField to_ewh(const GridField& sigma, const PhysicalConstants& pc, Epoch epoch) {
  if (sigma.unit() != Unit::kg_per_m2) {
    throw UnitError("to_ewh expects kg/m^2, got " + std::string(unit_name(sigma.unit())));
  }
  GridField out = sigma;
  out.values() /= pc.water_density;
  out.set_unit(Unit::m_ewh);
  return EwhField(epoch, std::move(out));
}

std::vector<EwhField> gldas_variation(const GridSeries& series, int bandlimit,
                                      const SmoothingSpec& smoothing, const PhysicalConstants& pc,
                                      Execution exec) {
  if (series.size() < 2) throw SeriesError("variations need at least two epochs");
  const auto& first = series.items.front().field;
  for (const auto& item : series.items) {
    if (item.field.unit() != Unit::kg_per_m2) {
      throw UnitError("land-surface grids must be in kg/m^2");
    }
    if (!item.field.same_axes(first)) {
      throw GridMismatch("grid of " + item.epoch.str() + " differs from the series");
    }
  }
  const long n = static_cast<long>(series.size());
  std::vector<HarmonicCoeffs> coeffs(static_cast<std::size_t>(n), HarmonicCoeffs(1));
  detail::parallel_for(n, exec, [&](long t) {
    coeffs[static_cast<std::size_t>(t)] = analysis(series.items[static_cast<std::size_t>(t)].field,
                                                   bandlimit, Execution::serial);
  });
  Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(num_coeffs(bandlimit));
  for (const auto& c : coeffs) mean += c.values();
  mean /= static_cast<double>(n);

  std::vector<std::optional<EwhField>> out(static_cast<std::size_t>(n));
  detail::parallel_for(n, exec, [&](long t) {
    const auto& item = series.items[static_cast<std::size_t>(t)];
    HarmonicCoeffs anomaly(bandlimit, coeffs[static_cast<std::size_t>(t)].values() - mean, true);
    GridField g = synthesis(smooth(anomaly, smoothing), first.thetas(), first.phis(), Execution::serial);
    g.set_unit(Unit::kg_per_m2);
    out[static_cast<std::size_t>(t)] = to_ewh(g, pc, item.epoch);
  });
  std::vector<EwhField> result;
  result.reserve(out.size());
  for (auto& f : out) result.push_back(std::move(*f));
  return result;
}

double regional_mean(const GridField& f, const Region& region) {
  const auto& th = f.thetas();
  const auto& ph = f.phis();
  double sum = 0.0, weight = 0.0;
  for (std::size_t j = 0; j < th.size(); ++j) {
    const double w = std::sin(th[j]);
    for (std::size_t k = 0; k < ph.size(); ++k) {
      if (!region.contains(th[j], ph[k])) continue;
      sum += w * f.values()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      weight += w;
    }
  }
  if (weight <= 0.0) {
    throw EmptyRegionError("no grid cell centre lies inside region " + region.name());
  }
  return sum / weight;
}

double regional_mean(const EwhField& f, const Region& region) {
  return regional_mean(f.field, region);
}

double window_weighted_mean(const GridField& f, const GridField& window_grid) {
  if (!f.same_axes(window_grid)) throw GridMismatch("window and field grids differ");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < f.thetas().size(); ++j) {
    const double w = std::sin(f.thetas()[j]);
    const auto r = static_cast<Eigen::Index>(j);
    num += w * (window_grid.values().row(r).array() * f.values().row(r).array()).sum();
    den += w * window_grid.values().row(r).sum();
  }
  if (den == 0.0) throw ConfigurationError("window integrates to zero on this grid");
  return num / den;
}

GridField window_on_grid(const WindowFunction& window, const Region& region,
                         std::span<const double> thetas, std::span<const double> phis,
                         Execution exec) {
  GridField g = synthesis(window.coeffs, thetas, phis, exec);
  const double mean = regional_mean(g, region);
  if (!(mean > 0.0)) {
    throw ConfigurationError("window has a nonpositive mean over region " + region.name());
  }
  g.values() /= mean;
  g.set_unit(Unit::dimensionless);
  return g;
}

EwhField localize(const EwhField& f, const GridField& window_grid) {
  if (!f.field.same_axes(window_grid)) {
    throw GridMismatch("window grid does not match the field grid");
  }
  GridField out = f.field;
  out.values().array() *= window_grid.values().array();
  return EwhField(f.epoch, std::move(out));
}

EwhField localize(const EwhField& f, const WindowFunction& window) {
  if (!window.region) throw ConfigurationError("window carries no region");
  return localize(f, window_on_grid(window, *window.region, f.field.thetas(), f.field.phis()));
}

EwhField gws(const EwhField& tws, const EwhField& swe, const EwhField& sms) {
  if (tws.epoch != swe.epoch || tws.epoch != sms.epoch) {
    throw SeriesError("series-alignment: epochs " + tws.epoch.str() + ", " + swe.epoch.str() +
                      ", " + sms.epoch.str() + " differ");
  }
  if (!tws.field.same_axes(swe.field) || !tws.field.same_axes(sms.field)) {
    throw GridMismatch("TWS, SWE and SMS grids differ");
  }
  GridField out = tws.field;
  out.values() -= swe.field.values();
  out.values() -= sms.field.values();
  return EwhField(tws.epoch, std::move(out));
}

namespace {

template <typename Item>
std::vector<Item> restrict_to(const std::vector<Item>& items, const std::set<Epoch>& keep) {
  std::vector<Item> out;
  for (const auto& item : items) {
    if (keep.count(item.epoch)) out.push_back(item);
  }
  return out;
}

}  // namespace

PipelineResult run_monthly(const StokesSeries& stokes, const GridSeries& swe,
                           const GridSeries& sms, const WindowFunction& window,
                           const Region& region, const PipelineConfig& config) {
  std::set<Epoch> all, common;
  for (const auto& s : stokes.items) all.insert(s.epoch);
  for (const auto& s : swe.items) all.insert(s.epoch);
  for (const auto& s : sms.items) all.insert(s.epoch);
  for (const auto& s : stokes.items) {
    const auto has = [&](const auto& series) {
      return std::any_of(series.items.begin(), series.items.end(),
                         [&](const auto& it) { return it.epoch == s.epoch; });
    };
    if (has(swe) && has(sms)) common.insert(s.epoch);
  }
  if (common.empty()) throw PipelineError("the input series share no epoch");

  PipelineResult result;
  for (const auto& e : all) {
    if (!common.count(e)) result.dropped.push_back(e);
  }
  if (config.snapshot && !common.count(*config.snapshot)) {
    throw ParameterError("snapshot month " + config.snapshot->str() + " is not processed");
  }

  const StokesSeries st = temporal_anomalies(StokesSeries{restrict_to(stokes.items, common)});
  const GridSeries sw{restrict_to(swe.items, common)};
  const GridSeries sm{restrict_to(sms.items, common)};
  if (!sw.items.front().field.same_axes(sm.items.front().field)) {
    throw GridMismatch("SWE and SMS grids differ");
  }
  const GridField& grid = sw.items.front().field;
  const int L = config.bandlimit;
  const auto& pc = config.constants;

  const std::vector<EwhField> swe_var = gldas_variation(sw, L, config.smoothing, pc, config.exec);
  const std::vector<EwhField> sms_var = gldas_variation(sm, L, config.smoothing, pc, config.exec);
  const GridField w = window_on_grid(window, region, grid.thetas(), grid.phis(), config.exec);
  // Love table check before the parallel map.
  degree_weights(L, config.love, pc);

  const long n = static_cast<long>(common.size());
  result.records.resize(static_cast<std::size_t>(n));
  std::vector<std::optional<Snapshot>> snaps(static_cast<std::size_t>(n));
  detail::parallel_for(n, config.exec, [&](long t) {
    const auto idx = static_cast<std::size_t>(t);
    const auto& s = st.items[idx];
    const HarmonicCoeffs c = smooth(pack_real_pair(s.c, s.s, L), config.smoothing);
    const EwhField tws = to_ewh(
        surface_density(c, config.love, pc, grid.thetas(), grid.phis(), Execution::serial), pc,
        s.epoch);
    const EwhField tws_loc = localize(tws, w);
    const EwhField swe_loc = localize(swe_var[idx], w);
    const EwhField sms_loc = localize(sms_var[idx], w);
    const EwhField gws_loc = gws(tws_loc, swe_loc, sms_loc);
    MonthlyRecord& rec = result.records[idx];
    rec.epoch = s.epoch;
    if (config.mean_mode == MeanMode::region) {
      rec.tws = regional_mean(tws_loc, region);
      rec.swe = regional_mean(swe_loc, region);
      rec.sms = regional_mean(sms_loc, region);
      rec.gws = regional_mean(gws_loc, region);
    } else {
      const EwhField g = gws(tws, swe_var[idx], sms_var[idx]);
      rec.tws = window_weighted_mean(tws.field, w);
      rec.swe = window_weighted_mean(swe_var[idx].field, w);
      rec.sms = window_weighted_mean(sms_var[idx].field, w);
      rec.gws = window_weighted_mean(g.field, w);
    }
    if (config.snapshot && *config.snapshot == s.epoch) {
      snaps[idx] = Snapshot{s.epoch, tws_loc.field, swe_loc.field, sms_loc.field, gws_loc.field};
    }
  });
  for (auto& s : snaps) {
    if (s) result.snapshot = std::move(s);
  }
  return result;
}

std::string format_series_csv(const std::vector<MonthlyRecord>& records) {
  std::string out = "year,month,gws_m,tws_m,swe_m,sms_m\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.15g,%.15g,%.15g,%.15g\n", r.epoch.year,
                  r.epoch.month, r.gws, r.tws, r.swe, r.sms);
    out += buf;
  }
  return out;
}

}  // namespace slepian
