#include <benchmark/benchmark.h>

#include <vector>

#include "pbci/decoder/shallow_convnet.hpp"
#include "pbci/nn/adam.hpp"
#include "pbci/nn/ops.hpp"
#include "pbci/signal/filtering.hpp"
#include "pbci/synth/generator.hpp"

namespace {

using namespace pbci;

nn::Tensor<float> random_batch(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  nn::Tensor<float> x({n, eeg::kCanonicalChannels, eeg::kCanonicalSamples});
  for (float& v : x.values()) v = static_cast<float>(10.0 * rng.gaussian());
  return x;
}

// Temporal then spatial convolution as two separate layers.
void BM_TwoStageConv(benchmark::State& state) {
  decoder::ShallowConvNet<float> net(decoder::ModelSpec::for_task(decoder::Task::intention), 1);
  net.set_fused_front_end(false);
  const auto x = random_batch(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict_logits(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TwoStageConv)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_FusedConv(benchmark::State& state) {
  decoder::ShallowConvNet<float> net(decoder::ModelSpec::for_task(decoder::Task::intention), 1);
  const auto x = random_batch(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict_logits(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FusedConv)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  decoder::ShallowConvNet<float> net(decoder::ModelSpec::for_task(decoder::Task::intention), 1);
  nn::Adam<float> adam(net.parameters());
  const auto x = random_batch(n, 3);
  std::vector<std::size_t> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = i % 4;
  std::uint64_t step = 0;
  for (auto _ : state) {
    nn::Tape<float> tape;
    const auto logits = net.forward(tape, x, nn::Mode::train, CounterRng(++step));
    tape.backward(nn::softmax_cross_entropy(tape, logits, targets));
    adam.step();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FiltfiltEpoch(benchmark::State& state) {
  const auto cascade = signal::design_bandpass(8.0, 30.0, 4, eeg::kCanonicalSampleRate);
  CounterRng rng(4);
  eeg::Epoch e;
  e.data = eeg::SampleMatrix(eeg::kCanonicalChannels, eeg::kCanonicalSamples);
  for (float& v : e.data.values()) v = static_cast<float>(rng.gaussian());
  for (auto _ : state) benchmark::DoNotOptimize(signal::filtfilt(e, cascade));
}
BENCHMARK(BM_FiltfiltEpoch)->Unit(benchmark::kMicrosecond);

void BM_SynthEpoch(benchmark::State& state) {
  const auto cfg = synth::preset("easy");
  const auto sig = synth::draw_signatures(cfg);
  int trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        synth::generate_epoch(cfg, sig, 1, eeg::Paradigm::MI, eeg::ImageryLabel::apple, trial++ % 50));
  }
}
BENCHMARK(BM_SynthEpoch)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
