#include <cmath>

#include <benchmark/benchmark.h>

#include "quakealarm/alarm.hpp"
#include "quakealarm/decluster.hpp"
#include "quakealarm/nullmodels.hpp"
#include "quakealarm/sigtests.hpp"

namespace qa = quakealarm;

namespace {

// Roughly CMT-sized: n events over five years, clustered into hotspots so
// that a realistic fraction of events fall inside alarms.
qa::Catalog synthetic(std::size_t n) {
  qa::Rng rng(2024);
  const qa::TimeInterval span{qa::make_instant(2000, 1, 1), qa::make_instant(2005, 1, 1)};
  std::vector<qa::GeoPoint> hotspots;
  for (int i = 0; i < 40; ++i) {
    hotspots.push_back(qa::sample_uniform(qa::LatLonBox{-60, 60, -180, 180}, rng));
  }
  std::vector<qa::Event> events;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& h = hotspots[rng.uniform_index(hotspots.size())];
    qa::Event e;
    e.epicenter = qa::GeoPoint(std::clamp(h.lat() + rng.uniform(-1, 1), -89.0, 89.0), h.lon() + rng.uniform(-1, 1));
    e.time = span.start + qa::seconds_to_duration(rng.uniform01() * (span.seconds() - 1));
    e.mb = 5.5 - std::log10(1.0 - rng.uniform01());
    if (*e.mb > 9.5) e.mb = 9.5;
    events.push_back(e);
  }
  return qa::Catalog(std::move(events), {qa::GlobalSphere{}, span});
}

void BM_CountPredicted(benchmark::State& state) {
  const auto c = synthetic(static_cast<std::size_t>(state.range(0)));
  const auto alarms = qa::generate_alarms(c, {}, qa::PredictorMode::II);
  for (auto _ : state) benchmark::DoNotOptimize(qa::count_predicted(c, alarms));
}
BENCHMARK(BM_CountPredicted)->Arg(500)->Arg(2000);

void BM_PermutationReplicate(benchmark::State& state) {
  const auto c = synthetic(static_cast<std::size_t>(state.range(0)));
  const auto alarms = qa::generate_alarms(c, {}, qa::PredictorMode::II);
  const qa::PermutationScorer scorer(c, alarms);
  std::uint64_t r = 0;
  for (auto _ : state) {
    qa::Rng rng(1, r++);
    const auto perm = qa::fisher_yates_permutation(scorer.size(), rng);
    benchmark::DoNotOptimize(scorer.count_permuted(perm));
  }
}
BENCHMARK(BM_PermutationReplicate)->Arg(500)->Arg(2000);

void BM_PermutationTest1000(benchmark::State& state) {
  const auto c = synthetic(2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qa::permutation_test(c, {}, qa::PredictorMode::II, 1000, 1));
  }
}
BENCHMARK(BM_PermutationTest1000)->Unit(benchmark::kMillisecond);

void BM_Decluster(benchmark::State& state) {
  const auto c = synthetic(static_cast<std::size_t>(state.range(0)));
  const qa::WindowTable w({{-INFINITY, 20, 40}, {6.0, 100, 80}, {7.0, 300, 150}});
  for (auto _ : state) benchmark::DoNotOptimize(qa::decluster(c, w));
}
BENCHMARK(BM_Decluster)->Arg(2000)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
