#include <benchmark/benchmark.h>

#include "safegen/sim/evaluator.hpp"
#include "safegen/sim/integration.hpp"
#include "safegen/sim/reference_controller.hpp"

namespace {

using namespace safegen;

void BM_ReferenceEpisode(benchmark::State& state) {
  const BehaviorSpec b;
  const auto endpoint = sim::reference_endpoint(b);
  for (auto _ : state) {
    auto tel = sim::run_episode(endpoint, b, sim::SimConfig{}, 7);
    benchmark::DoNotOptimize(tel.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * 2400);
}
BENCHMARK(BM_ReferenceEpisode)->Unit(benchmark::kMillisecond);

void BM_EvaluateEpisode(benchmark::State& state) {
  const BehaviorSpec b;
  const auto tel = sim::run_episode(sim::reference_endpoint(b), b, sim::SimConfig{}, 7);
  for (auto _ : state) {
    auto r = sim::evaluate_data(tel, b);
    benchmark::DoNotOptimize(r.band_occupancy);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tel.samples.size()));
}
BENCHMARK(BM_EvaluateEpisode);

void BM_TelemetryCsv(benchmark::State& state) {
  const BehaviorSpec b;
  const auto tel = sim::run_episode(sim::reference_endpoint(b), b, sim::SimConfig{}, 7);
  for (auto _ : state) {
    auto csv = sim::to_csv(tel);
    benchmark::DoNotOptimize(csv.data());
  }
}
BENCHMARK(BM_TelemetryCsv)->Unit(benchmark::kMicrosecond);

}  // namespace
