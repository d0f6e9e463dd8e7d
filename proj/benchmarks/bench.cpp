#include <benchmark/benchmark.h>

#include <random>

#include "oracles.hpp"
#include "plmtest/forest.hpp"
#include "plmtest/lasso.hpp"
#include "plmtest/penhance.hpp"
#include "plmtest/qtest.hpp"

using namespace plmtest;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

void BM_TraceFast(benchmark::State& state) {
  const Matrix x = gaussian(state.range(0), 500, 1);
  for (auto _ : state) benchmark::DoNotOptimize(qtest::trace_sigma2_hat(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TraceFast)->RangeMultiplier(2)->Range(16, 128)->Complexity(benchmark::oNCubed);

// Quadruple loop; kept small.
void BM_TraceLiteral(benchmark::State& state) {
  const Matrix x = gaussian(state.range(0), 500, 1);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::trace_sigma2(x));
}
BENCHMARK(BM_TraceLiteral)->RangeMultiplier(2)->Range(16, 32);

void BM_QuadStat(benchmark::State& state) {
  const Matrix x = gaussian(100, state.range(0), 2);
  const Vector r = gaussian(100, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(qtest::quad_stat(r, x));
}
BENCHMARK(BM_QuadStat)->Arg(500)->Arg(1000);

void BM_MarginalStats(benchmark::State& state) {
  const Matrix x = gaussian(100, state.range(0), 2);
  const Vector r = gaussian(100, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(penhance::marginal_stats(r, x));
}
BENCHMARK(BM_MarginalStats)->Arg(500)->Arg(1000);

void BM_SoftThreshold(benchmark::State& state) {
  const Matrix x = gaussian(100, 500, 2);
  const Vector r = gaussian(100, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(penhance::soft_threshold(r, x, 200, 7));
}
BENCHMARK(BM_SoftThreshold)->Unit(benchmark::kMillisecond);

void BM_LassoCv(benchmark::State& state) {
  const Matrix z = gaussian(100, state.range(0), 4);
  const Vector y = z.leftCols(5).rowwise().sum() + gaussian(100, 1, 5).col(0);
  for (auto _ : state) {
    Rng rng(6);
    benchmark::DoNotOptimize(lasso::lasso_cv(z, y, {}, rng));
  }
}
BENCHMARK(BM_LassoCv)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_ForestFit(benchmark::State& state) {
  const Matrix z = gaussian(100, state.range(0), 4);
  const Vector y = z.leftCols(5).rowwise().sum() + gaussian(100, 1, 5).col(0);
  for (auto _ : state) {
    Rng rng(6);
    benchmark::DoNotOptimize(forest::forest_fit(z, y, {}, rng));
  }
}
BENCHMARK(BM_ForestFit)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
