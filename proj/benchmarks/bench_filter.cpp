#include <benchmark/benchmark.h>

#include "gprobe/filter.hpp"
#include "gprobe/probe.hpp"

using namespace gprobe;

namespace {

JointProbe sparse_probe(Index d) {
  Rng rng(3);
  JointProbe p = init_probe(d, rng, 1.0);
  for (Index j = 0; j < d; j += 3) p.sv_bias[j] = 0.0;
  p.icpt_bias = Vector::Ones(d);
  return p;
}

void BM_ApplyFilter(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const AffineFilter f = build_filter(sparse_probe(d), {FilterKind::BiasOnly, 1e-12, 0});
  const Vector h = Vector::LinSpaced(d, -1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_filter(f, h));
  }
}
BENCHMARK(BM_ApplyFilter)->Arg(64)->Arg(768)->Arg(1024);

void BM_BuildFilter(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  const JointProbe p = sparse_probe(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_filter(p, {FilterKind::BiasKeepGender, 1e-12, 0}));
  }
}
BENCHMARK(BM_BuildFilter)->Arg(64)->Arg(768)->Unit(benchmark::kMillisecond);

}  // namespace
