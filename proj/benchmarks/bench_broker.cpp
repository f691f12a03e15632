#include <benchmark/benchmark.h>

#include <broker/duality.hpp>
#include <broker/mechanisms.hpp>
#include <broker/oracle.hpp>

using namespace broker;

namespace {

ProductionCostInstance grid_instance(std::size_t buyers, std::size_t items, std::size_t support) {
  std::vector<double> values;
  std::vector<double> probs;
  for (std::size_t k = 0; k < support; ++k) {
    values.push_back(static_cast<double>(2 * k + 1));
    probs.push_back(1.0 / static_cast<double>(support));
  }
  const DiscreteDist d(values, probs);
  BuyerPriors priors(buyers, std::vector<DiscreteDist>(items, d));
  return ProductionCostInstance(std::move(priors), std::vector<double>(items, 1.0));
}

void BM_ExactProfit(benchmark::State& state, const CostMechanism& mechanism) {
  const auto inst = grid_instance(state.range(0), state.range(1), state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(expected_profit(mechanism, inst).value);
}

void BM_It(benchmark::State& state) { BM_ExactProfit(state, ItMechanism{}); }
void BM_Bvcg(benchmark::State& state) { BM_ExactProfit(state, BvcgMechanism{}); }
void BM_1la(benchmark::State& state) { BM_ExactProfit(state, OneLookaheadMechanism{}); }

void BM_MonteCarloMix(benchmark::State& state) {
  const auto inst = grid_instance(3, 3, 4);
  const MixMechanism mix;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_profit(mix, inst, MonteCarlo{static_cast<std::uint64_t>(state.range(0)), 7}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OptLp(benchmark::State& state) {
  const auto inst = grid_instance(state.range(0), state.range(1), state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(opt_lp(inst));
}

void BM_DualityTerms(benchmark::State& state) {
  const auto inst = grid_instance(2, 2, 3);
  const auto interim = interim_form(MixMechanism{}, inst);
  for (auto _ : state) benchmark::DoNotOptimize(compute_terms(interim, inst).sum());
}

}  // namespace

BENCHMARK(BM_It)->Args({2, 2, 3})->Args({3, 3, 3});
BENCHMARK(BM_Bvcg)->Args({2, 2, 3})->Args({3, 3, 3});
BENCHMARK(BM_1la)->Args({2, 2, 3})->Args({3, 3, 3});
BENCHMARK(BM_MonteCarloMix)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OptLp)->Args({1, 2, 3})->Args({2, 2, 2})->Args({2, 2, 3})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DualityTerms)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
