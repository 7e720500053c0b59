#include <benchmark/benchmark.h>

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "mtube/fields.hpp"
#include "mtube/garding.hpp"
#include "mtube/measures.hpp"
#include "mtube/singularity.hpp"

using namespace mtube;

namespace {

HermitianMatrix random_hermitian(int n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return HermitianMatrix(a);
}

Point sample_point(const FlatModel& model, double r) {
  Eigen::VectorXcd normal(model.k);
  for (int a = 0; a < model.k; ++a)
    normal[a] = std::complex<double>(0.5 + 0.1 * a, -0.2);
  normal *= r / normal.norm();
  Eigen::VectorXcd tangent(model.n - model.k);
  for (int a = 0; a < model.n - model.k; ++a) tangent[a] = {1.0, 2.0};
  return Point{normal, tangent};
}

void bm_sigma_minors(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HermitianMatrix h = random_hermitian(n);
  for (auto _ : state)
    for (int j = 1; j <= n; ++j) benchmark::DoNotOptimize(sigma_minors(h, j));
}
BENCHMARK(bm_sigma_minors)->Arg(3)->Arg(5)->Arg(8);

void bm_fd_hessian(benchmark::State& state) {
  const FlatModel model(3, 2, 1);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 1));
  const Point p = sample_point(model, 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(fd_hessian(f, p, model, 1e-3));
}
BENCHMARK(bm_fd_hessian);

void bm_gamma_m_scan(benchmark::State& state) {
  const FlatModel model(3, 2, 2);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2));
  const auto grid = scan_grid(model, model.tube_radius / 50.0,
                              model.tube_radius / 2.0, 10, 8, 8);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(gamma_m_scan(f, model, grid, 0.0, 1e-9, threads));
}
BENCHMARK(bm_gamma_m_scan)->Arg(1)->Arg(4);

void bm_tube_quadrature(benchmark::State& state) {
  const FlatModel model(3, 2, 2);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2));
  for (auto _ : state)
    benchmark::DoNotOptimize(tube_integral(f, model, model.tube_radius / 4.0,
                                           TubeMethod::RadialQuadrature));
}
BENCHMARK(bm_tube_quadrature);

void bm_tube_monte_carlo(benchmark::State& state) {
  const FlatModel model(3, 2, 2);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2));
  IntegralParams params;
  params.threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(tube_integral(f, model, model.tube_radius / 4.0,
                                           TubeMethod::MonteCarlo, params));
}
BENCHMARK(bm_tube_monte_carlo)->Arg(1)->Arg(4);

void bm_relative_type(benchmark::State& state) {
  const FlatModel model(3, 2, 2);
  const ScalarField f = ScalarField::radial(WeightFamily::g_pure(2, 2));
  const auto levels = default_type_levels(model);
  for (auto _ : state)
    benchmark::DoNotOptimize(relative_type(f, model, levels, 16, 16));
}
BENCHMARK(bm_relative_type);

}  // namespace

BENCHMARK_MAIN();
