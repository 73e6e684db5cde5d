#include <cmath>
#include <fstream>
#include <sstream>

#include "slepian/errors.hpp"
#include "slepian/region_window.hpp"
#include "text_format.hpp"

namespace slepian {

namespace text {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace text

LatLonBox::LatLonBox(double theta1, double theta2, double phi1, double phi2)
    : theta1_(theta1), theta2_(theta2), phi1_(phi1), phi2_(phi2) {
  if (!(0.0 <= theta1 && theta1 < theta2 && theta2 <= kPi)) {
    throw MalformedInput("box colatitudes must satisfy 0 <= theta1 < theta2 <= pi");
  }
  if (!(0.0 <= phi1 && phi1 < phi2 && phi2 <= 2.0 * kPi)) {
    throw MalformedInput("box longitudes must satisfy 0 <= phi1 < phi2 <= 2pi");
  }
}

namespace {

double deg_to_rad(double deg, double limit_deg) {
  if (deg == limit_deg) return limit_deg == 180.0 ? kPi : 2.0 * kPi;
  return deg * kPi / 180.0;
}

}  // namespace

LatLonBox LatLonBox::from_degrees(double theta1, double theta2, double phi1, double phi2) {
  return LatLonBox(deg_to_rad(theta1, 180.0), deg_to_rad(theta2, 180.0), deg_to_rad(phi1, 360.0),
                   deg_to_rad(phi2, 360.0));
}

double LatLonBox::area() const {
  return (std::cos(theta1_) - std::cos(theta2_)) * (phi2_ - phi1_);
}

bool LatLonBox::contains(double theta, double phi) const {
  return theta >= theta1_ && theta <= theta2_ && phi >= phi1_ && phi <= phi2_;
}

bool LatLonBox::interiors_overlap(const LatLonBox& other) const {
  const double dt = std::min(theta2_, other.theta2_) - std::max(theta1_, other.theta1_);
  const double dp = std::min(phi2_, other.phi2_) - std::max(phi1_, other.phi1_);
  return dt > 0.0 && dp > 0.0;
}

Region::Region(std::vector<LatLonBox> boxes, std::string name)
    : boxes_(std::move(boxes)), name_(std::move(name)) {
  if (boxes_.empty()) throw MalformedInput("region has no boxes");
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes_.size(); ++j) {
      if (boxes_[i].interiors_overlap(boxes_[j])) {
        throw MalformedInput("boxes " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                             " overlap");
      }
    }
  }
}

double Region::area() const {
  double total = 0.0;
  for (const auto& b : boxes_) total += b.area();
  return total;
}

bool Region::contains(double theta, double phi) const {
  for (const auto& b : boxes_) {
    if (b.contains(theta, phi)) return true;
  }
  return false;
}

Region Region::full_sphere() { return Region({LatLonBox(0.0, kPi, 0.0, 2.0 * kPi)}, "sphere"); }

Region parse_region(std::string_view content, std::string name) {
  std::vector<LatLonBox> boxes;
  std::vector<int> rows;
  text::for_each_line(content, [&](int line_no, std::string_view line) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto fields = text::split(line, ',');
    if (fields.size() != 4) throw ParseError("expected theta1,theta2,phi1,phi2", line_no);
    double v[4];
    for (int i = 0; i < 4; ++i) {
      const auto parsed = text::parse_double(fields[i]);
      if (!parsed) throw ParseError("not a number: '" + std::string(fields[i]) + "'", line_no);
      v[i] = *parsed;
    }
    if (!(0.0 <= v[0] && v[0] < v[1] && v[1] <= 180.0)) {
      throw ParseError("colatitude bounds must satisfy 0 <= theta1 < theta2 <= 180", line_no);
    }
    if (!(0.0 <= v[2] && v[2] < v[3] && v[3] <= 360.0)) {
      throw ParseError("longitude bounds must satisfy 0 <= phi1 < phi2 <= 360", line_no);
    }
    const LatLonBox box = LatLonBox::from_degrees(v[0], v[1], v[2], v[3]);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (boxes[i].interiors_overlap(box)) {
        throw ParseError("box overlaps the box on line " + std::to_string(rows[i]), line_no);
      }
    }
    boxes.push_back(box);
    rows.push_back(line_no);
  });
  if (boxes.empty()) throw ParseError("region file contains no boxes", 0);
  return Region(std::move(boxes), std::move(name));
}

Region load_region(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInput("region file not found: " + path.string());
  }
  return parse_region(text::read_file(path.string()), path.stem().string());
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = mid - half * x;
    nodes[n - 1 - i] = mid + half * x;
    weights[i] = weights[n - 1 - i] = half * w;
  }
}

namespace {

double box_energy(const HarmonicCoeffs& window, const LatLonBox& box) {
  const int L = window.bandlimit();
  std::vector<double> th, wt, ph, wp;
  const int n_theta = static_cast<int>(std::ceil(L * (box.theta2() - box.theta1()))) + 24;
  gauss_legendre(n_theta, box.theta1(), box.theta2(), th, wt);
  const double span = box.phi2() - box.phi1();
  if (span >= 2.0 * kPi) {
    const int n_phi = 2 * L + 2;
    ph = equiangular_phis(n_phi);
    wp.assign(ph.size(), 2.0 * kPi / n_phi);
  } else {
    const int n_phi = static_cast<int>(std::ceil(L * span)) + 24;
    gauss_legendre(n_phi, box.phi1(), box.phi2(), ph, wp);
  }
  const RowMatrixXcd f = synthesis_complex(window, th, ph, Execution::serial);
  double total = 0.0;
  for (std::size_t j = 0; j < th.size(); ++j) {
    double ring = 0.0;
    for (std::size_t k = 0; k < ph.size(); ++k) ring += wp[k] * std::norm(f(j, k));
    total += wt[j] * std::sin(th[j]) * ring;
  }
  return total;
}

}  // namespace

double concentration_ratio_spatial(const HarmonicCoeffs& window, const Region& region) {
  const int L = window.bandlimit();
  // Whole sphere: |f|^2 is band-limited at 2L - 1, so 2L midpoint rings and
  // 2L columns integrate it exactly.
  const auto thetas = equiangular_thetas(2 * L + 2);
  const auto phis = equiangular_phis(2 * L + 2);
  const auto w = ring_weights(thetas);
  const RowMatrixXcd f = synthesis_complex(window, thetas, phis, Execution::serial);
  double whole = 0.0;
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    double ring = 0.0;
    for (std::size_t k = 0; k < phis.size(); ++k) ring += std::norm(f(j, k));
    whole += w[j] * ring * 2.0 * kPi / static_cast<double>(phis.size());
  }
  if (whole == 0.0) throw MalformedInput("window has zero energy");
  double inside = 0.0;
  for (const auto& box : region.boxes()) inside += box_energy(window, box);
  return inside / whole;
}

double concentration_ratio_spatial(const WindowFunction& window, const Region& region) {
  return concentration_ratio_spatial(window.coeffs, region);
}

void save_window(const WindowFunction& window, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << "# slepian window\n";
  out << "# bandlimit: " << window.coeffs.bandlimit() << "\n";
  out << "# lambda: " << text::format_double(window.lambda) << "\n";
  if (window.region) {
    out << "# region: " << window.region->name() << "\n";
    for (const auto& b : window.region->boxes()) {
      out << "# box: " << text::format_double(b.theta1()) << ","
          << text::format_double(b.theta2()) << "," << text::format_double(b.phi1()) << ","
          << text::format_double(b.phi2()) << "\n";
    }
  }
  out << "l,m,re,im\n";
  const int L = window.coeffs.bandlimit();
  for (int l = 0; l < L; ++l) {
    for (int m = -l; m <= l; ++m) {
      const cplx v = window.coeffs(l, m);
      out << l << "," << m << "," << text::format_double(v.real()) << ","
          << text::format_double(v.imag()) << "\n";
    }
  }
}

WindowFunction load_window(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInput("window file not found: " + path.string());
  }
  const std::string content = text::read_file(path.string());
  int bandlimit = -1;
  double lambda = 0.0;
  std::string region_name = "region";
  std::vector<LatLonBox> boxes;
  std::vector<std::tuple<int, int, cplx>> rows;
  bool header_seen = false;
  text::for_each_line(content, [&](int line_no, std::string_view line) {
    line = text::trim(line);
    if (line.empty()) return;
    if (line.front() == '#') {
      auto body = text::trim(line.substr(1));
      auto colon = body.find(':');
      if (colon == std::string_view::npos) return;
      const auto key = text::trim(body.substr(0, colon));
      const auto value = text::trim(body.substr(colon + 1));
      if (key == "bandlimit") {
        const auto v = text::parse_int(value);
        if (!v) throw ParseError("bad bandlimit", line_no);
        bandlimit = static_cast<int>(*v);
      } else if (key == "lambda") {
        const auto v = text::parse_double(value);
        if (!v) throw ParseError("bad lambda", line_no);
        lambda = *v;
      } else if (key == "region") {
        region_name = std::string(value);
      } else if (key == "box") {
        const auto f = text::split(value, ',');
        if (f.size() != 4) throw ParseError("bad box", line_no);
        double b[4];
        for (int i = 0; i < 4; ++i) {
          const auto v = text::parse_double(f[i]);
          if (!v) throw ParseError("bad box", line_no);
          b[i] = *v;
        }
        boxes.emplace_back(b[0], b[1], b[2], b[3]);
      }
      return;
    }
    if (!header_seen) {
      if (line != "l,m,re,im") throw ParseError("expected header l,m,re,im", line_no);
      header_seen = true;
      return;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 4) throw ParseError("expected l,m,re,im", line_no);
    const auto l = text::parse_int(f[0]);
    const auto m = text::parse_int(f[1]);
    const auto re = text::parse_double(f[2]);
    const auto im = text::parse_double(f[3]);
    if (!l || !m || !re || !im) throw ParseError("malformed coefficient row", line_no);
    rows.emplace_back(static_cast<int>(*l), static_cast<int>(*m), cplx(*re, *im));
  });
  if (bandlimit < 1) throw ParseError("window file lacks a bandlimit header", 0);
  HarmonicCoeffs coeffs(bandlimit);
  for (const auto& [l, m, v] : rows) {
    if (l >= bandlimit) throw ParseError("degree beyond bandlimit in window file", 0);
    coeffs(l, m) = v;
  }
  WindowFunction w;
  const bool real = coeffs.conjugate_symmetry_residual() <= 1e-12;
  w.coeffs = HarmonicCoeffs(bandlimit, coeffs.values(), real);
  w.lambda = lambda;
  if (!boxes.empty()) w.region = Region(std::move(boxes), region_name);
  return w;
}

}  // namespace slepian
