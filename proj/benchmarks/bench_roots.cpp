#include <benchmark/benchmark.h>

#include "smeq/char_roots.hpp"

namespace {

void BM_ChiRoots(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(smeq::chi_roots(b));
  }
}
BENCHMARK(BM_ChiRoots)->Arg(8)->Arg(27)->Arg(64);

}  // namespace
