#include <benchmark/benchmark.h>

#include "tempfid/marginal.hpp"
#include "tempfid/simgen.hpp"

namespace {

using namespace tempfid;

LongDataset sample(std::size_t n) {
  ContinuousModel m;
  m.mean_fn = {{10.0}, 2.0, 24.0, 0.0};
  m.nugget_var = 0.5;
  m.serial_var = 1.0;
  m.serial_range = 3.0;
  m.intercept_var = 1.0;
  ObservationDesign d;
  d.subjects = n;
  d.keep_probability = {0.6};
  return simulate_continuous(m, d, 11);
}

void BM_MeanProfile(benchmark::State& state) {
  const LongDataset ds = sample(static_cast<std::size_t>(state.range(0)));
  const TimeGrid grid(0, 47, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mean_profile(ds, "x", grid, Bandwidth{kDefaultBandwidth}));
}
BENCHMARK(BM_MeanProfile)->Arg(500)->Arg(2500)->Unit(benchmark::kMillisecond);

void BM_QuantileProfile(benchmark::State& state) {
  const LongDataset ds = sample(static_cast<std::size_t>(state.range(0)));
  const TimeGrid grid(0, 47, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(quantile_profile(ds, "x", grid, Bandwidth{kDefaultBandwidth}));
  }
}
BENCHMARK(BM_QuantileProfile)->Arg(500)->Arg(2500)->Unit(benchmark::kMillisecond);

}  // namespace
