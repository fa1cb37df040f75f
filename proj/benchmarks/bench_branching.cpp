#include <benchmark/benchmark.h>

#include "smeq/branching.hpp"

namespace {

void BM_SimulateCyclicPolya(benchmark::State& state) {
  const auto model = smeq::presets::cyclic_polya(7);
  const double alpha = 1.6038754716096765049;
  smeq::BranchingConfig cfg;
  cfg.max_depth = static_cast<int>(state.range(0));
  uint64_t seed = 0;
  uint64_t nodes = 0;
  for (auto _ : state) {
    cfg.root_seed = seed++;
    const auto draw = smeq::simulate_joint(model, alpha, cfg);
    nodes += draw.node_count;
    benchmark::DoNotOptimize(draw.W);
  }
  state.SetItemsProcessed(static_cast<int64_t>(nodes));
}
BENCHMARK(BM_SimulateCyclicPolya)->Arg(8)->Arg(12)->Arg(16);

void BM_ManyToOneWalk(benchmark::State& state) {
  const auto model = smeq::presets::cyclic_polya(7);
  const double alpha = 1.6038754716096765049;
  uint64_t seed = 0;
  for (auto _ : state) {
    const auto path = smeq::many_to_one_walk(model, alpha, static_cast<int>(state.range(0)), seed++);
    benchmark::DoNotOptimize(path.weight);
  }
}
BENCHMARK(BM_ManyToOneWalk)->Arg(64)->Arg(1024);

}  // namespace
