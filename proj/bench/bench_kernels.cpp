#include <random>

#include <benchmark/benchmark.h>

#include "slepian/pipeline.hpp"
#include "slepian/reference.hpp"
#include "slepian/region_window.hpp"
#include "slepian/sh_core.hpp"

using namespace slepian;

namespace {

const Region& irb() {
  static const Region r = load_region(std::string(SLEPIAN_DATA_DIR) + "/irb_44boxes.csv");
  return r;
}

HarmonicCoeffs random_coeffs(int L) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(L * L);
  for (int l = 0; l < L; ++l) {
    v[l * l + l] = g(rng);
    for (int m = 1; m <= l; ++m) {
      const cplx c(g(rng), g(rng));
      v[l * l + l + m] = c;
      v[l * l + l - m] = ((m % 2) ? -1.0 : 1.0) * std::conj(c);
    }
  }
  return HarmonicCoeffs(L, v, true);
}

void BM_KernelSerial(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernel_region(irb(), L, Execution::serial));
}

void BM_KernelParallel(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernel_region(irb(), L, Execution::parallel));
}

void BM_KernelReference(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(reference::kernel(irb(), L));
}

void BM_SynthesisSerial(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto c = random_coeffs(L);
  const auto th = equiangular_thetas(2 * L);
  const auto ph = equiangular_phis(2 * L);
  for (auto _ : st) benchmark::DoNotOptimize(synthesis(c, th, ph, Execution::serial));
}

void BM_SynthesisParallel(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto c = random_coeffs(L);
  const auto th = equiangular_thetas(2 * L);
  const auto ph = equiangular_phis(2 * L);
  for (auto _ : st) benchmark::DoNotOptimize(synthesis(c, th, ph, Execution::parallel));
}

void BM_SynthesisReference(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto c = random_coeffs(L);
  const auto th = equiangular_thetas(2 * L);
  const auto ph = equiangular_phis(2 * L);
  for (auto _ : st) benchmark::DoNotOptimize(reference::synthesis(c, th, ph));
}

void BM_AnalysisSerial(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto g = synthesis(random_coeffs(L), equiangular_thetas(2 * L), equiangular_phis(2 * L));
  for (auto _ : st) benchmark::DoNotOptimize(analysis(g, L, Execution::serial));
}

void BM_AnalysisParallel(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto g = synthesis(random_coeffs(L), equiangular_thetas(2 * L), equiangular_phis(2 * L));
  for (auto _ : st) benchmark::DoNotOptimize(analysis(g, L, Execution::parallel));
}

void BM_AnalysisReference(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto g = synthesis(random_coeffs(L), equiangular_thetas(2 * L), equiangular_phis(2 * L));
  for (auto _ : st) benchmark::DoNotOptimize(reference::analysis(g, L));
}

void BM_ApplySerial(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Eigen::MatrixXcd k = Eigen::MatrixXcd::Random(n, n);
  const Eigen::VectorXcd f = Eigen::VectorXcd::Random(n);
  for (auto _ : st) benchmark::DoNotOptimize(kernel_apply(k, f, Execution::serial));
}

void BM_ApplyParallel(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Eigen::MatrixXcd k = Eigen::MatrixXcd::Random(n, n);
  const Eigen::VectorXcd f = Eigen::VectorXcd::Random(n);
  for (auto _ : st) benchmark::DoNotOptimize(kernel_apply(k, f, Execution::parallel));
}

void BM_ApplyReference(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Eigen::MatrixXcd k = Eigen::MatrixXcd::Random(n, n);
  const Eigen::VectorXcd f = Eigen::VectorXcd::Random(n);
  for (auto _ : st) benchmark::DoNotOptimize(reference::matvec(k, f));
}

}  // namespace

BENCHMARK(BM_KernelSerial)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelParallel)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelReference)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesisSerial)->Arg(16)->Arg(61)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesisParallel)->Arg(16)->Arg(61)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesisReference)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalysisSerial)->Arg(16)->Arg(61)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalysisParallel)->Arg(16)->Arg(61)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AnalysisReference)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplySerial)->Arg(1024)->Arg(3721);
BENCHMARK(BM_ApplyParallel)->Arg(1024)->Arg(3721);
BENCHMARK(BM_ApplyReference)->Arg(1024)->Arg(3721);

BENCHMARK_MAIN();
