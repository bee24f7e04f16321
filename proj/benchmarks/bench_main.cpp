#include <random>

#include <benchmark/benchmark.h>

#include "fshadow/channel.hpp"
#include "fshadow/circulant.hpp"
#include "fshadow/estimator.hpp"
#include "fshadow/fock.hpp"

using namespace fshadow;

namespace {

fock::StateVector cdw_input(int L, int L_anc) {
  std::vector<int> occ(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) occ[static_cast<std::size_t>(j)] = j % 2;
  return fock::embed_with_ancillas(fock::fock_state(occ), L_anc);
}

std::vector<estimator::EstimatorPlan> all_2pt(int L, int L_anc) {
  std::vector<estimator::EstimatorPlan> plans;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) plans.push_back(estimator::plan_2pt(i, j, L, L_anc));
  return plans;
}

}  // namespace

// 4-point channel matrix, d = C(L_tot, 2)^2.
void BM_M4Build(benchmark::State& state) {
  const int L_tot = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(channel::m4_matrix(L_tot));
}
BENCHMARK(BM_M4Build)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_SampleCirculant(benchmark::State& state) {
  const int L_tot = static_cast<int>(state.range(0));
  const auto spec = circulant::EnsembleSpec::uniform(L_tot, 120.0);
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(circulant::sample_ensemble(spec, rng));
}
BENCHMARK(BM_SampleCirculant)->Arg(5)->Arg(7)->Arg(9);

// Evolve, measure and record one protocol shot.
void BM_GenerateShots(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0)), L_anc = L % 2 == 0 ? 1 : 2;
  const auto input = cdw_input(L, L_anc);
  const auto spec = circulant::EnsembleSpec::uniform(L + L_anc, 120.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimator::generate_shots(input, spec, 100, ++seed));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_GenerateShots)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMicrosecond);

// Single-shot values for every 2-point target.
void BM_EvaluateShots2pt(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0)), L_anc = L % 2 == 0 ? 1 : 2;
  const auto spec = circulant::EnsembleSpec::uniform(L + L_anc, 120.0);
  const auto shots = estimator::generate_shots(cdw_input(L, L_anc), spec, 1000, 7);
  const auto plans = all_2pt(L, L_anc);
  for (auto _ : state) benchmark::DoNotOptimize(estimator::evaluate_shots(plans, shots));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EvaluateShots2pt)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_EvaluateShots4pt(benchmark::State& state) {
  const int L = 5, L_anc = 2;
  const auto spec = circulant::EnsembleSpec::uniform(7, 120.0);
  const auto shots = estimator::generate_shots(cdw_input(L, L_anc), spec, 1000, 7);
  const auto M4 = channel::m4_matrix(7);
  std::vector<estimator::EstimatorPlan> plans;
  for (int k = 0; k < L; ++k)
    for (int l = k + 1; l < L; ++l)
      plans.push_back(estimator::plan_4pt(estimator::CorrelationTarget::four_point(0, 1, k, l), L, L_anc, M4));
  for (auto _ : state) benchmark::DoNotOptimize(estimator::evaluate_shots(plans, shots));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EvaluateShots4pt)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
