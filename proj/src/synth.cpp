#include "slepian/synth.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "text_format.hpp"

namespace slepian {

void SyntheticScenario::validate() const {
  if (bandlimit < 1 || bandlimit > kMaxBandlimit) throw ParameterError("bandlimit out of range");
  if (months < 24) throw ParameterError("months must be at least 24");
  if (!(noise_rms_m >= 0.0)) throw ParameterError("noise_rms_m must be nonnegative");
  if (!std::isfinite(trend_m_per_yr) || !std::isfinite(seasonal_amplitude_m)) {
    throw ParameterError("trend and amplitude must be finite");
  }
  if (start.month < 1 || start.month > 12) throw ParameterError("start month out of range");
  const double n_lat = 180.0 / grid_step_deg;
  if (!(grid_step_deg > 0.0) || std::abs(n_lat - std::round(n_lat)) > 1e-9) {
    throw ParameterError("grid_step_deg must divide 180");
  }
  if (std::round(n_lat) < 2 * bandlimit) {
    throw ParameterError("grid too coarse for the bandlimit");
  }
}

SyntheticScenario parse_scenario(std::string_view content) {
  SyntheticScenario s;
  text::for_each_line(content, [&](int line_no, std::string_view line) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    const auto as_int = [&]() {
      const auto v = text::parse_int(value);
      if (!v) throw ParseError("expected an integer for " + std::string(key), line_no);
      return *v;
    };
    const auto as_double = [&]() {
      const auto v = text::parse_double(value);
      if (!v) throw ParseError("expected a number for " + std::string(key), line_no);
      return *v;
    };
    if (key == "bandlimit") {
      s.bandlimit = static_cast<int>(as_int());
    } else if (key == "months") {
      s.months = static_cast<int>(as_int());
    } else if (key == "trend_m_per_yr") {
      s.trend_m_per_yr = as_double();
    } else if (key == "seasonal_amplitude_m") {
      s.seasonal_amplitude_m = as_double();
    } else if (key == "noise_rms_m") {
      s.noise_rms_m = as_double();
    } else if (key == "seed") {
      const auto v = as_int();
      if (v < 0) throw ParseError("seed must be nonnegative", line_no);
      s.seed = static_cast<std::uint64_t>(v);
    } else if (key == "start") {
      try {
        s.start = Epoch::parse(value);
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
      }
    } else if (key == "grid_step_deg") {
      s.grid_step_deg = as_double();
    } else {
      throw ParseError("unknown key '" + std::string(key) + "'", line_no);
    }
  });
  s.validate();
  return s;
}

SyntheticScenario load_scenario(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInput("scenario file not found: " + path.string());
  }
  return parse_scenario(text::read_file(path.string()));
}

std::string serialize_scenario(const SyntheticScenario& s) {
  std::string out;
  out += "bandlimit=" + std::to_string(s.bandlimit) + "\n";
  out += "months=" + std::to_string(s.months) + "\n";
  out += "trend_m_per_yr=" + text::format_double(s.trend_m_per_yr) + "\n";
  out += "seasonal_amplitude_m=" + text::format_double(s.seasonal_amplitude_m) + "\n";
  out += "noise_rms_m=" + text::format_double(s.noise_rms_m) + "\n";
  out += "seed=" + std::to_string(s.seed) + "\n";
  out += "start=" + s.start.str() + "\n";
  out += "grid_step_deg=" + text::format_double(s.grid_step_deg) + "\n";
  return out;
}

namespace {

// Coefficients of the region indicator, <1_R, Y_l^m>, for l < L.
HarmonicCoeffs indicator_coeffs(const Region& region, int L) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(num_coeffs(L));
  std::vector<double> nodes, weights;
  for (const auto& box : region.boxes()) {
    gauss_legendre(L + 24, box.theta1(), box.theta2(), nodes, weights);
    std::vector<double> theta_int(static_cast<std::size_t>(L * (L + 1) / 2), 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto x = legendre_table(L, nodes[i]);
      const double w = weights[i] * std::sin(nodes[i]);
      for (std::size_t j = 0; j < x.size(); ++j) theta_int[j] += w * x[j];
    }
    for (int l = 0; l < L; ++l) {
      for (int m = 0; m <= l; ++m) {
        v[index(l, m)] += theta_int[static_cast<std::size_t>(legendre_offset(l, m))] *
                          s_integral(-m, box.phi1(), box.phi2());
      }
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int m = 1; m <= l; ++m) {
      v[index(l, -m)] = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(v[index(l, m)]);
    }
  }
  return HarmonicCoeffs(L, std::move(v), true);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigurationError("failed writing " + path.string());
}

std::string stamp(const Epoch& e) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d%02d", e.year, e.month);
  return buf;
}

}  // namespace

ScenarioData make_scenario(const SyntheticScenario& s, const Region& region,
                           const LoveNumbers& love, const PhysicalConstants& pc) {
  s.validate();
  const int L = s.bandlimit;
  const auto dw = degree_weights(L, love, pc);

  const int n_lat = static_cast<int>(std::lround(180.0 / s.grid_step_deg));
  const int n_lon = 2 * n_lat;
  std::vector<double> lat_deg(static_cast<std::size_t>(n_lat)), lon_deg(static_cast<std::size_t>(n_lon));
  std::vector<double> thetas(lat_deg.size()), phis(lon_deg.size());
  for (int j = 0; j < n_lat; ++j) {
    lat_deg[j] = 90.0 - (j + 0.5) * s.grid_step_deg;
    thetas[j] = (90.0 - lat_deg[j]) * kPi / 180.0;
  }
  for (int k = 0; k < n_lon; ++k) {
    lon_deg[k] = (k + 0.5) * s.grid_step_deg;
    phis[k] = lon_deg[k] * kPi / 180.0;
  }

  ScenarioData data;
  const HarmonicCoeffs indicator = indicator_coeffs(region, L);
  data.representability = indicator.values().squaredNorm() / region.area();
  if (data.representability < 0.9) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "bandlimit %d captures only %.3f of the region indicator energy (< 0.9)", L,
                  data.representability);
    data.warnings.emplace_back(buf);
  }
  GridField pattern_grid = synthesis(indicator, thetas, phis);
  const double pattern_mean = regional_mean(pattern_grid, region);
  if (!(pattern_mean > 0.0)) throw ConfigurationError("region pattern has no positive mean");
  pattern_grid.values() /= pattern_mean;
  const Eigen::VectorXcd pattern = indicator.values() / pattern_mean;

  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho_w = pc.water_density;
  const double two_pi = 2.0 * kPi;

  Epoch epoch = s.start;
  for (int t = 0; t < s.months; ++t, epoch = epoch.next()) {
    const double years = t / 12.0;
    // Annual terms are phased about the middle of the record.
    const double phase = two_pi * (t - 0.5 * (s.months - 1)) / 12.0;
    GroundTruth g;
    g.epoch = epoch;
    g.gws = s.trend_m_per_yr * years + s.seasonal_amplitude_m * std::cos(phase);
    g.swe = 0.5 * s.seasonal_amplitude_m * std::cos(phase + two_pi / 3.0);
    g.sms = 0.5 * s.seasonal_amplitude_m * std::cos(phase - two_pi / 3.0);
    g.tws = g.gws + g.swe + g.sms;
    data.truth.push_back(g);

    // Noise grid first so the draw order is fixed per month.
    RowMatrixXd noise(n_lat, n_lon);
    for (int j = 0; j < n_lat; ++j) {
      for (int k = 0; k < n_lon; ++k) noise(j, k) = s.noise_rms_m * normal(rng);
    }

    Eigen::VectorXcd sigma = rho_w * g.tws * pattern;
    if (s.noise_rms_m > 0.0) {
      const GridField noise_field(thetas, phis, rho_w * noise, Unit::kg_per_m2);
      sigma += analysis(noise_field, L).values();
    }
    for (int l = 0; l < L; ++l) {
      for (int m = -l; m <= l; ++m) sigma[index(l, m)] /= dw[static_cast<std::size_t>(l)];
    }
    auto [c, sn] = unpack_real_pair(HarmonicCoeffs(L, std::move(sigma), true));
    c(0, 0) += 1.0;
    if (c.lmax() >= 2) c(2, 0) += -4.841695e-4;
    data.stokes.items.push_back(StokesEpoch{epoch, L - 1, std::move(c), std::move(sn)});

    const auto grid_epoch = [&](double amplitude) {
      GridEpoch ge;
      ge.epoch = epoch;
      ge.field = GridField(thetas, phis, rho_w * amplitude * pattern_grid.values(), Unit::kg_per_m2);
      ge.lat_deg = lat_deg;
      ge.lon_deg = lon_deg;
      return ge;
    };
    data.swe.items.push_back(grid_epoch(g.swe));
    data.sms.items.push_back(grid_epoch(g.sms));
  }
  return data;
}

void write_scenario(const ScenarioData& data, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "stokes");
  fs::create_directories(dir / "swe");
  fs::create_directories(dir / "sms");
  for (const auto& s : data.stokes.items) {
    write_text(dir / "stokes" / ("GSM-" + stamp(s.epoch) + ".txt"), serialize_stokes(s));
  }
  for (const auto& g : data.swe.items) {
    write_text(dir / "swe" / ("SWE-" + stamp(g.epoch) + ".csv"),
               serialize_grid(g.field, g.lat_deg, g.lon_deg));
  }
  for (const auto& g : data.sms.items) {
    write_text(dir / "sms" / ("SMS-" + stamp(g.epoch) + ".csv"),
               serialize_grid(g.field, g.lat_deg, g.lon_deg));
  }
  std::vector<MonthlyRecord> truth;
  for (const auto& g : data.truth) truth.push_back({g.epoch, g.gws, g.tws, g.swe, g.sms});
  write_text(dir / "ground_truth.csv", format_series_csv(truth));
}

namespace {

// Adaptive Gauss-Kronrod with an absolute error target: a piece is accepted
// once its embedded error estimate is below its share of the budget or at
// the round-off floor of its own magnitude.
double integrate_abs(const std::function<double(double)>& f, double a, double b, double tol,
                     int depth = 0) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double error = 0.0, l1 = 0.0;
  const double value = GK::integrate(f, a, b, 0, 0.0, &error, &l1);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (error <= std::max(tol, floor) || depth >= 30) return value;
  const double mid = 0.5 * (a + b);
  return integrate_abs(f, a, mid, 0.5 * tol, depth + 1) +
         integrate_abs(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace

cplx quadrature_kernel_entry(int l, int m, int p, int q, const LatLonBox& box) {
  if (std::abs(m) > l || std::abs(q) > p) throw InvalidOrder("order exceeds degree");
  // conj(Y_l^m) Y_p^q = s_m s_q X_l^|m| X_p^|q| e^{i(q-m)phi}, with
  // s_m = (-1)^m for negative m.
  const double sign = ((m < 0 && m % 2 != 0) ? -1.0 : 1.0) * ((q < 0 && q % 2 != 0) ? -1.0 : 1.0);
  const int am = std::abs(m), aq = std::abs(q);
  const double theta_part = integrate_abs(
      [&](double t) { return assoc_legendre(l, am, t) * assoc_legendre(p, aq, t) * std::sin(t); },
      box.theta1(), box.theta2(), 1e-14);
  const int k = q - m;
  const double re = integrate_abs([&](double ph) { return std::cos(k * ph); }, box.phi1(),
                                  box.phi2(), 1e-14);
  const double im = integrate_abs([&](double ph) { return std::sin(k * ph); }, box.phi1(),
                                  box.phi2(), 1e-14);
  return sign * theta_part * cplx(re, im);
}

std::pair<double, Eigen::VectorXcd> dense_eig_max(const Eigen::MatrixXcd& k) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || n == 0) throw MalformedInput("dense_eig_max needs a nonempty square matrix");
  const Eigen::Index N = 2 * n;
  Eigen::MatrixXd a(N, N);
  const Eigen::MatrixXd re = 0.5 * (k.real() + k.real().transpose());
  const Eigen::MatrixXd im = 0.5 * (k.imag() - k.imag().transpose());
  a.topLeftCorner(n, n) = re;
  a.bottomRightCorner(n, n) = re;
  a.topRightCorner(n, n) = -im;
  a.bottomLeftCorner(n, n) = im;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(N, N);

  const double total = a.norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < N; ++p) {
      for (Eigen::Index q = p + 1; q < N; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * total || off == 0.0) break;
    for (Eigen::Index p = 0; p < N; ++p) {
      for (Eigen::Index q = p + 1; q < N; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index r = 0; r < N; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < N; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (Eigen::Index r = 0; r < N; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  Eigen::Index top = 0;
  a.diagonal().maxCoeff(&top);
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = cplx(v(i, top), v(n + i, top));
  x.normalize();
  return {a(top, top), x};
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("slope needs two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ParameterError("slope undefined for constant abscissa");
  return sxy / sxx;
}

}  // namespace slepian
