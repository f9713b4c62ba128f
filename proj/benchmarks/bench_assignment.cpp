#include <benchmark/benchmark.h>

#include <random>

#include "tempfid/assignment.hpp"
#include "tempfid/measurement.hpp"

namespace {

using namespace tempfid;

void BM_SolveRandomCosts(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cost(0, 48);
  CostMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c(i, j) = cost(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveRandomCosts)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_MeasurementSimilarity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const TimeGrid grid(0, 47, 1);
  std::mt19937_64 rng(2);
  std::bernoulli_distribution bit(0.4);
  const auto draw = [&] {
    std::vector<std::vector<int>> rows(n, std::vector<int>(grid.size()));
    for (auto& row : rows) {
      for (int& v : row) v = bit(rng);
    }
    return MeasurementMatrix::from_rows(grid, rows);
  };
  const MeasurementMatrix a = draw();
  const MeasurementMatrix b = draw();
  for (auto _ : state) benchmark::DoNotOptimize(measurement_similarity(a, b));
}
BENCHMARK(BM_MeasurementSimilarity)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
