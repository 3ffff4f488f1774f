#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "gprobe/probe.hpp"
#include "gprobe/synth.hpp"
#include "gprobe/trainer.hpp"

using namespace gprobe;

namespace {

std::vector<ProbeSample> batch(Index d, std::size_t n) {
  SynthConfig c;
  c.d = d;
  c.k_bias = c.k_gender = d / 8;
  c.k_shared = d / 16;
  c.n_samples = n;
  return generate_synthetic(c).samples;
}

void BM_ProbeGrad(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  Rng rng(1);
  const JointProbe p = init_probe(d, rng);
  const auto b = batch(d, 10);
  ProbeGrad g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(probe_loss_and_grad(p, b, 0.1, g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.size()));
}
BENCHMARK(BM_ProbeGrad)->Arg(64)->Arg(768)->Arg(1024);

void BM_ProbeForward(benchmark::State& state) {
  const auto d = static_cast<Index>(state.range(0));
  Rng rng(2);
  const JointProbe p = init_probe(d, rng);
  const auto b = batch(d, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(probe_forward(p, b[0].delta, Task::Bias));
  }
}
BENCHMARK(BM_ProbeForward)->Arg(64)->Arg(768)->Arg(1024);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = batch(64, 2000);
  const std::vector<ProbeSample> train(data.begin(), data.begin() + 1200);
  const std::vector<ProbeSample> dev(data.begin() + 1200, data.begin() + 1600);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_joint_probe(train, dev, cfg));
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
