#include <benchmark/benchmark.h>

#include "mcsd/engine/step.hpp"
#include "mcsd/model/synthetic.hpp"

namespace {

using namespace mcsd;

struct Pair {
  TabularModel target = make_synthetic_target({32, 1, 2.5, 1});
  TabularModel draft = smoothed_draft(target, 1.5);
};

const Pair& models() {
  static const Pair pair;
  return pair;
}

void BM_BaselineSdStep(benchmark::State& state) {
  const StepContext ctx{models().draft, models().target};
  const TokenSeq prefix{1, 2, 3};
  Rng rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(baseline_sd_step(ctx, prefix, 4, rng));
}
BENCHMARK(BM_BaselineSdStep);

void BM_McsdStep(benchmark::State& state) {
  const StepContext ctx{models().draft, models().target};
  const TreePlan plan(parse_tree_config("4,2,2,1"));
  const TokenSeq prefix{1, 2, 3};
  Rng rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(mcsd_step(ctx, plan, prefix, rng));
}
BENCHMARK(BM_McsdStep);

void BM_TargetInitStep(benchmark::State& state) {
  const StepContext ctx{models().draft, models().target};
  const TreePlan plan(parse_tree_config("2,4,3,1,1", true));
  const TokenSeq prefix{1, 2, 3};
  Rng rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(target_init_step(ctx, plan, prefix, rng));
}
BENCHMARK(BM_TargetInitStep);

void BM_DynamicStep(benchmark::State& state) {
  const StepContext ctx{models().draft, models().target};
  const TreePlan plan(TreeConfig::fork(static_cast<int>(state.range(0)), 5));
  const DecisionModel decision{DecisionT2()};
  const TokenSeq prefix{1, 2, 3};
  Rng rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(dynamic_mcsd_step(ctx, plan, prefix, decision, 0.4, rng));
}
BENCHMARK(BM_DynamicStep)->Arg(4)->Arg(16);

}  // namespace
