#include <benchmark/benchmark.h>

#include "tempfid/covariance.hpp"
#include "tempfid/simgen.hpp"

namespace {

using namespace tempfid;

void BM_Variogram(benchmark::State& state) {
  ContinuousModel m;
  m.nugget_var = 0.2;
  m.serial_var = 0.8;
  m.serial_range = 3.0;
  m.intercept_var = 0.5;
  ObservationDesign d;
  d.subjects = static_cast<std::size_t>(state.range(0));
  d.keep_probability = {0.6};
  const LongDataset ds = simulate_continuous(m, d, 5);
  const auto lags = default_lags(d.grid);
  for (auto _ : state) benchmark::DoNotOptimize(variogram(ds, "x", lags, Bandwidth{kDefaultBandwidth}));
}
BENCHMARK(BM_Variogram)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
