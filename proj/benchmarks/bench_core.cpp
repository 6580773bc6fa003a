#include "colrec/collective.hpp"
#include "colrec/learner.hpp"
#include "colrec/popularity_gap.hpp"
#include "colrec/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace colrec;

namespace {

RatingsMatrix s1_scaled(Index group_size) {
  S1Spec spec;
  spec.group_size = group_size;
  return generate_s1(spec);
}

void BM_Truncate(benchmark::State& state) {
  const RatingsMatrix r = s1_scaled(static_cast<Index>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(truncate(r, 4));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.users()));
}
BENCHMARK(BM_Truncate)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RecommendTop1(benchmark::State& state) {
  const RatingsMatrix r_hat = truncate(s1_scaled(static_cast<Index>(state.range(0))), 4);
  for (auto _ : state) benchmark::DoNotOptimize(recommend(r_hat, 1, TieBreak::seeded(1)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r_hat.users()));
}
BENCHMARK(BM_RecommendTop1)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RecommendTopK(benchmark::State& state) {
  const RatingsMatrix r_hat = truncate(s1_scaled(1000), 4);
  const auto k = static_cast<Index>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(recommend(r_hat, k, TieBreak::seeded(1)));
}
BENCHMARK(BM_RecommendTopK)->Arg(2)->Arg(4);

void BM_FindEta(benchmark::State& state) {
  FinderInputs z;
  z.sigma_kmaj = 10;
  z.alpha = 2.1;
  z.n_bar = 4;
  z.picky_col_sq = 4;
  z.av = 25;
  z.kappa = 1;
  z.coll_size = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(z);
    benchmark::DoNotOptimize(find_eta(z));
  }
}
BENCHMARK(BM_FindEta);

void BM_BlockSpectrum(benchmark::State& state) {
  BlockSpec spec;
  spec.group_min = spec.group_max = static_cast<Index>(state.range(0));
  const BlockInstance b = generate_blocks(spec, 1);
  for (auto _ : state) benchmark::DoNotOptimize(spectral(b.ratings));
}
BENCHMARK(BM_BlockSpectrum)->Arg(50)->Arg(500);

void BM_ClassMembership(benchmark::State& state) {
  const PopGapInstance inst = generate_popgap(PopGapSpec{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(class_membership(inst.ratings, inst.n_bar));
}
BENCHMARK(BM_ClassMembership);

}  // namespace

BENCHMARK_MAIN();
