#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "flatsph/haarmc.hpp"
#include "flatsph/kernels.hpp"
#include "flatsph/specfun.hpp"

using namespace flatsph;

static void BM_BesselJ(benchmark::State& state) {
  const double s = static_cast<double>(state.range(0));
  const specfun::BesselOrder nu(1.5);
  for (auto _ : state) benchmark::DoNotOptimize(specfun::bessel_j(nu, s));
}
BENCHMARK(BM_BesselJ)->Arg(5)->Arg(20)->Arg(100)->Arg(1000);

static void BM_KernelDeterminant(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const std::array<double, 3> x = {3.0, 2.0, 1.0};
  const std::array<double, 3> l = {7.3, 4.1, 1.9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::kernel_determinant(1, std::span(x.data(), p), std::span(l.data(), p)));
  }
}
BENCHMARK(BM_KernelDeterminant)->Arg(1)->Arg(2)->Arg(3);

static void BM_KernelNearWall(benchmark::State& state) {
  const std::array<double, 2> x = {2.0, 1.0};
  const std::array<double, 2> l = {5.0 + 1e-8, 5.0};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kernel_determinant(1, x, l));
}
BENCHMARK(BM_KernelNearWall);

static void BM_Integrand(benchmark::State& state) {
  kernels::IntegrandSpec spec;
  spec.datum = spaces::aiii_datum(2, 3);
  spec.point = spaces::classify_point(std::array<double, 2>{2.0, 1.0});
  spec.k = 2;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 200.0);
  for (auto _ : state) {
    const std::array<double, 2> l = {u(rng), u(rng)};
    benchmark::DoNotOptimize(kernels::integrand_phi(spec, l));
  }
}
BENCHMARK(BM_Integrand);

static void BM_HaarUnitary(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(haarmc::haar_unitary(n, rng));
}
BENCHMARK(BM_HaarUnitary)->Arg(2)->Arg(3)->Arg(8);
BENCHMARK_MAIN();
