#include <benchmark/benchmark.h>

#include <cmath>

#include "smeq/stable_laws.hpp"

namespace {

using namespace smeq;

StableSpec snail_spec(double alpha) {
  auto g = GroupDescriptor::from_complex_exponent(
      std::exp(Complex(0.0, 2.0 * 3.14159265358979323846 / 7.0)));
  SpectralMeasure rho;
  Vec s(2);
  s << 1.0, 0.0;
  rho.atoms.push_back({s, 1.0});
  return StableSpec::jump(alpha, std::move(g), std::move(rho));
}

void BM_PsiEvalSnail(benchmark::State& state) {
  const StableSpec spec = snail_spec(1.0 + state.range(0) / 10.0);
  Vec x(2);
  x << 0.8, 0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(psi_eval(spec, x));
  }
}
BENCHMARK(BM_PsiEvalSnail)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SampleJump(benchmark::State& state) {
  const StableSpec spec = snail_spec(1.3);
  SamplerOptions opts;
  opts.gaussian_correction = true;
  const StableSampler sampler(spec, opts);
  RngStream rng = RngStream::from_root_seed(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.sample(1.0, rng));
  }
}
BENCHMARK(BM_SampleJump);

void BM_SampleIsotropic(benchmark::State& state) {
  RngStream rng = RngStream::from_root_seed(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_isotropic_stable(1.5, 1.0, 2, 1.0, rng));
  }
}
BENCHMARK(BM_SampleIsotropic);

}  // namespace
