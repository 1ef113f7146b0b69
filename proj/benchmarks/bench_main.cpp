#include <benchmark/benchmark.h>

#include "rsma/harness.hpp"
#include "rsma/subproblem.hpp"

namespace {

using namespace rsma;

SystemConfig preset(int which) { return which == 0 ? desk_scale_config() : paper_scale_config(); }

void BM_BuildSubproblem(benchmark::State& state) {
  const auto sc = make_scenario(preset(static_cast<int>(state.range(0))), 1);
  const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const auto u = update_aux(w, sc.channel, s, sc.noise_power_w);
  for (auto _ : state) {
    auto sub = build_subproblem(sc.channel, s, u, sc.config, sc.noise_power_w);
    benchmark::DoNotOptimize(sub);
  }
}
BENCHMARK(BM_BuildSubproblem)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_SolveFirstSubproblem(benchmark::State& state) {
  const auto sc = make_scenario(preset(static_cast<int>(state.range(0))), 1);
  const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const auto u = update_aux(w, sc.channel, s, sc.noise_power_w);
  const auto sub = build_subproblem(sc.channel, s, u, sc.config, sc.noise_power_w);
  for (auto _ : state) {
    auto res = conic::solve(sub.program, {});
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_SolveFirstSubproblem)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RunPoint(benchmark::State& state) {
  const auto scheme = static_cast<SchemeKind>(state.range(0));
  state.SetLabel(to_string(scheme));
  for (auto _ : state) {
    auto out = run_point(desk_scale_config(), 1, scheme, CriticalityVariant::kMixed, {2, 1}, 2, {});
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_RunPoint)
    ->Arg(static_cast<int>(SchemeKind::kRsma))
    ->Arg(static_cast<int>(SchemeKind::kScm))
    ->Arg(static_cast<int>(SchemeKind::kTin))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
