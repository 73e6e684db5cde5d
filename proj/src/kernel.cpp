#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "slepian/errors.hpp"
#include "slepian/region_window.hpp"

namespace slepian {

ConcentrationKernel::ConcentrationKernel(int bandlimit, Eigen::MatrixXcd entries)
    : bandlimit_(bandlimit), entries_(std::move(entries)) {
  const Eigen::Index n = num_coeffs(bandlimit);
  if (bandlimit < 1 || entries_.rows() != n || entries_.cols() != n) {
    throw MalformedInput("kernel matrix must be L^2 x L^2");
  }
}

double ConcentrationKernel::hermitian_residual() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

cplx q_integral(int m, double theta1, double theta2) {
  const cplx i(0.0, 1.0);
  if (std::abs(m) == 1) {
    return 0.25 * (i * (2.0 * m) * (theta2 - theta1) + std::polar(1.0, 2.0 * m * theta1) -
                   std::polar(1.0, 2.0 * m * theta2));
  }
  const double mm = static_cast<double>(m);
  const cplx a = std::polar(1.0, mm * theta1) * cplx(-std::cos(theta1), mm * std::sin(theta1));
  const cplx b = std::polar(1.0, mm * theta2) * cplx(std::cos(theta2), -mm * std::sin(theta2));
  return (a + b) / (mm * mm - 1.0);
}

cplx s_integral(int m, double phi1, double phi2) {
  if (m == 0) return {phi2 - phi1, 0.0};
  const cplx i(0.0, 1.0);
  return i / static_cast<double>(m) *
         (std::polar(1.0, m * phi1) - std::polar(1.0, m * phi2));
}

namespace {

// (-i)^m for any integer m.
cplx minus_i_pow(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {0.0, -1.0};
    case 2:
      return {-1.0, 0.0};
    default:
      return {0.0, 1.0};
  }
}

double degree_norm(int l) { return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)); }

// Real part of the Fourier table: D^l_{k,m} = Delta^l_{m'_k,m} Delta^l_{m'_k,0}
// with m'_k = -l + 2k. Frequencies of the other parity vanish identically.
struct FourierTable {
  int bandlimit;
  std::vector<std::size_t> offsets;
  std::vector<double> data;

  explicit FourierTable(const WignerTable& w, int L) : bandlimit(L) {
    offsets.resize(static_cast<std::size_t>(L));
    std::size_t total = 0;
    for (int l = 0; l < L; ++l) {
      offsets[l] = total;
      total += static_cast<std::size_t>((2 * l + 1) * (l + 1));
    }
    data.resize(total);
    for (int l = 0; l < L; ++l) {
      for (int m = -l; m <= l; ++m) {
        for (int k = 0; k <= l; ++k) {
          const int mp = -l + 2 * k;
          at(l, m)[k] = w(l, mp, m) * w(l, mp, 0);
        }
      }
    }
  }

  double* at(int l, int m) { return data.data() + offsets[l] + (m + l) * (l + 1); }
  const double* at(int l, int m) const { return data.data() + offsets[l] + (m + l) * (l + 1); }
};

void accumulate_band(double theta1, double theta2, const std::vector<const LatLonBox*>& boxes,
                     const FourierTable& ft, Eigen::MatrixXcd& k, Execution exec) {
  const int L = ft.bandlimit;
  const int n = num_coeffs(L);
  const int qoff = 2 * (L - 1);
  std::vector<cplx> q(static_cast<std::size_t>(2 * qoff + 1));
  for (int d = -qoff; d <= qoff; ++d) q[d + qoff] = q_integral(d, theta1, theta2);

  std::vector<std::vector<cplx>> s(boxes.size(), std::vector<cplx>(q.size()));
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    for (int d = -qoff; d <= qoff; ++d) {
      s[b][d + qoff] = s_integral(d, boxes[b]->phi1(), boxes[b]->phi2());
    }
  }

  // g(j, m' + L - 1) = sum_{q'} F^p_{q',q} Q(m' + q') for column j = (p, q).
  const int width = 2 * L - 1;
  RowMatrixXcd g(n, width);
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (int j = 0; j < n; ++j) {
    const auto [p, qq] = degree_order(j);
    const double* dp = ft.at(p, qq);
    const cplx phase = minus_i_pow(qq) * degree_norm(p);
    for (int mp = -(L - 1); mp <= L - 1; ++mp) {
      cplx sum = 0.0;
      for (int kk = 0; kk <= p; ++kk) sum += dp[kk] * q[mp + (-p + 2 * kk) + qoff];
      g(j, mp + L - 1) = phase * sum;
    }
  }

  std::vector<int> order_of(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) order_of[j] = degree_order(j).second;

  // K_{lm,pq} += S(q - m) sum_{m'} F^l_{m',m} g_{pq}(m'), upper triangle only.
#pragma omp parallel for schedule(dynamic, 4) if (exec == Execution::parallel)
  for (int i = 0; i < n; ++i) {
    const auto [l, m] = degree_order(i);
    const double* dl = ft.at(l, m);
    const cplx phase = minus_i_pow(m) * degree_norm(l);
    const int first = L - 1 - l;
    for (int j = i; j < n; ++j) {
      const cplx* gj = g.data() + static_cast<std::ptrdiff_t>(j) * width + first;
      double re = 0.0, im = 0.0;
      for (int kk = 0; kk <= l; ++kk) {
        const cplx v = gj[2 * kk];
        re += dl[kk] * v.real();
        im += dl[kk] * v.imag();
      }
      const cplx t = phase * cplx(re, im);
      const int dq = order_of[j] - m + qoff;
      for (std::size_t b = 0; b < boxes.size(); ++b) k(i, j) += s[b][dq] * t;
    }
  }
}

ConcentrationKernel assemble(const std::vector<LatLonBox>& boxes, int L, const WignerTable& w,
                             Execution exec) {
  if (L < 1) throw ParameterError("bandlimit must be positive");
  if (w.bandlimit() < L) throw ParameterError("Wigner table smaller than the kernel bandlimit");
  const FourierTable ft(w, L);
  const int n = num_coeffs(L);
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);

  // Boxes sharing a colatitude band share the theta-only part of the entries.
  std::vector<std::pair<double, double>> bands;
  std::vector<std::vector<const LatLonBox*>> members;
  for (const auto& b : boxes) {
    std::size_t idx = 0;
    while (idx < bands.size() &&
           !(bands[idx].first == b.theta1() && bands[idx].second == b.theta2())) {
      ++idx;
    }
    if (idx == bands.size()) {
      bands.emplace_back(b.theta1(), b.theta2());
      members.emplace_back();
    }
    members[idx].push_back(&b);
  }
  for (std::size_t idx = 0; idx < bands.size(); ++idx) {
    accumulate_band(bands[idx].first, bands[idx].second, members[idx], ft, k, exec);
  }
  for (int i = 0; i < n; ++i) {
    k(i, i) = cplx(k(i, i).real(), 0.0);
    for (int j = i + 1; j < n; ++j) k(j, i) = std::conj(k(i, j));
  }
  return ConcentrationKernel(L, std::move(k));
}

}  // namespace

cplx f_coeff(int l, int mprime, int m, const WignerTable& wigner) {
  if (l < 0 || l >= wigner.bandlimit() || std::abs(mprime) > l || std::abs(m) > l) {
    throw InvalidOrder("f_coeff order out of range");
  }
  return minus_i_pow(m) * degree_norm(l) * wigner(l, mprime, m) * wigner(l, mprime, 0);
}

ConcentrationKernel kernel_box(const LatLonBox& box, int bandlimit, const WignerTable& wigner,
                               Execution exec) {
  return assemble({box}, bandlimit, wigner, exec);
}

ConcentrationKernel kernel_region(const Region& region, int bandlimit, Execution exec) {
  const WignerTable w(bandlimit);
  return assemble(region.boxes(), bandlimit, w, exec);
}

Eigen::VectorXcd kernel_apply(const Eigen::MatrixXcd& k, const Eigen::VectorXcd& f,
                              Execution exec) {
  // Hermitian input: row i of K is the conjugate of column i, which is
  // contiguous in column-major storage.
  const Eigen::Index n = k.rows();
  Eigen::VectorXcd y(n);
#pragma omp parallel for schedule(static) if (exec == Execution::parallel)
  for (Eigen::Index i = 0; i < n; ++i) y[i] = k.col(i).dot(f);
  return y;
}

namespace {

constexpr char kMagic[8] = {'S', 'L', 'E', 'P', 'K', 'R', 'N', '1'};

void put_le64(char* out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
}

double get_le64(const unsigned char* in) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(in[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_kernel(const ConcentrationKernel& kernel, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigurationError("cannot write kernel cache " + tmp);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t L = static_cast<std::uint32_t>(kernel.bandlimit());
    char lbuf[4];
    for (int b = 0; b < 4; ++b) lbuf[b] = static_cast<char>((L >> (8 * b)) & 0xff);
    out.write(lbuf, 4);
    const auto& k = kernel.entries();
    const Eigen::Index n = k.rows();
    std::vector<char> row;
    for (Eigen::Index i = 0; i < n; ++i) {
      row.resize(static_cast<std::size_t>(n - i) * 16);
      for (Eigen::Index j = i; j < n; ++j) {
        put_le64(row.data() + (j - i) * 16, k(i, j).real());
        put_le64(row.data() + (j - i) * 16 + 8, k(i, j).imag());
      }
      out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw ConfigurationError("failed writing kernel cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ConcentrationKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open kernel cache " + path.string());
  char magic[8];
  unsigned char lbuf[4];
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(lbuf), 4);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a kernel cache file: " + path.string(), 0);
  }
  const std::uint32_t L = lbuf[0] | (lbuf[1] << 8) | (lbuf[2] << 16) |
                          (static_cast<std::uint32_t>(lbuf[3]) << 24);
  if (L < 1 || L > static_cast<std::uint32_t>(kMaxBandlimit)) {
    throw ParseError("kernel cache bandlimit out of range", 0);
  }
  const Eigen::Index n = num_coeffs(static_cast<int>(L));
  const auto expected = 12 + static_cast<std::uintmax_t>(n) * (n + 1) / 2 * 16;
  if (std::filesystem::file_size(path) != expected) {
    throw ParseError("kernel cache has the wrong size: " + path.string(), 0);
  }
  Eigen::MatrixXcd k(n, n);
  std::vector<unsigned char> row;
  for (Eigen::Index i = 0; i < n; ++i) {
    row.resize(static_cast<std::size_t>(n - i) * 16);
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw ParseError("truncated kernel cache", 0);
    for (Eigen::Index j = i; j < n; ++j) {
      const cplx v(get_le64(row.data() + (j - i) * 16), get_le64(row.data() + (j - i) * 16 + 8));
      k(i, j) = v;
      k(j, i) = std::conj(v);
    }
  }
  return ConcentrationKernel(static_cast<int>(L), std::move(k));
}

}  // namespace slepian
