#include <benchmark/benchmark.h>

#include <map>

#include "hpm/design.hpp"
#include "hpm/rng.hpp"
#include "hpm/selection.hpp"
#include "hpm/solver.hpp"
#include "hpm/synth.hpp"

namespace {

struct League {
  hpm::DesignBuild build;
  hpm::PenaltySpec penalty;
};

const League& league(std::size_t events) {
  static std::map<std::size_t, League> cache;
  auto it = cache.find(events);
  if (it != cache.end()) return it->second;
  hpm::SynthConfig c;
  c.n_teams = 4;
  c.players_per_team = 15;
  c.n_events = events;
  c.n_planted = 10;
  c.seed = 8;
  const auto gen = hpm::generate(c);
  const auto cat = hpm::build_catalog(gen.events);
  League l{hpm::build_design(gen.events, cat), hpm::PenaltySpec::for_catalog(cat)};
  return cache.emplace(events, std::move(l)).first->second;
}

void BM_SparseApply(benchmark::State& state) {
  const auto& l = league(static_cast<std::size_t>(state.range(0)));
  hpm::Rng rng(1);
  std::vector<double> coef(l.build.matrix.n_cols());
  for (auto& c : coef) c = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(l.build.matrix.apply(coef));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(l.build.matrix.nnz()));
}
BENCHMARK(BM_SparseApply)->Arg(2000)->Arg(20000);

void BM_ColumnDots(benchmark::State& state) {
  const auto& l = league(static_cast<std::size_t>(state.range(0)));
  std::vector<double> r(l.build.matrix.n_rows(), 0.5);
  for (auto _ : state) {
    double s = 0.0;
    for (std::size_t j = 0; j < l.build.matrix.n_cols(); ++j) s += l.build.matrix.column_dot(j, r);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_ColumnDots)->Arg(2000)->Arg(20000);

void BM_BuildDesign(benchmark::State& state) {
  hpm::SynthConfig c;
  c.n_events = static_cast<std::size_t>(state.range(0));
  const auto gen = hpm::generate(c);
  const auto cat = hpm::build_catalog(gen.events);
  for (auto _ : state) benchmark::DoNotOptimize(hpm::build_design(gen.events, cat));
}
BENCHMARK(BM_BuildDesign)->Arg(20000);

void BM_FitPath(benchmark::State& state) {
  const auto& l = league(static_cast<std::size_t>(state.range(0)));
  hpm::FitConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hpm::fit_path(l.build.matrix, l.build.y, l.penalty, cfg));
  }
}
BENCHMARK(BM_FitPath)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_CrossValidate(benchmark::State& state) {
  const auto& l = league(2000);
  hpm::FitConfig cfg;
  cfg.n_lambda = 30;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hpm::cv_select(l.build.matrix, l.build.y, l.penalty, cfg, 5, 1));
  }
}
BENCHMARK(BM_CrossValidate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
