#include <benchmark/benchmark.h>

#include <random>

#include "gebc/pipeline.hpp"

using namespace gebc;

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<float> d(0.0f, 1e-3f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(eng);
  return v;
}

void BM_Quantize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto v = noise(n, 1);
  const auto p = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(quantize(v, p, 1e-4));
  state.SetBytesProcessed(std::int64_t(state.iterations()) * std::int64_t(4 * n));
}
BENCHMARK(BM_Quantize)->Arg(1 << 14)->Arg(1 << 20);

void BM_HuffmanEncode(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto q = quantize(noise(n, 3), 1e-4);
  for (auto _ : state) benchmark::DoNotOptimize(entropy_encode(q.bins));
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(n));
}
BENCHMARK(BM_HuffmanEncode)->Arg(1 << 14)->Arg(1 << 20);

void BM_HuffmanDecode(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto block = entropy_encode(quantize(noise(n, 4), 1e-4).bins);
  for (auto _ : state) benchmark::DoNotOptimize(entropy_decode(block));
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(n));
}
BENCHMARK(BM_HuffmanDecode)->Arg(1 << 14)->Arg(1 << 20);

// Steady-state round: history from one warm round, then round 2 repeatedly.
void BM_CompressRound(benchmark::State& state) {
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("conv2:64x32x3x3"), parse_layer_spec("conv3:128x64x3x3"),
                parse_layer_spec("fc:10x2048")};
  cfg.rounds = 2;
  cfg.mode = state.range(0) ? TraceMode::full_batch : TraceMode::mini_batch;
  const auto trace = synth_trace(cfg);
  PipelineParams params;
  params.predict.full_batch = state.range(0) != 0;
  ClientState warm = ClientState::init(trace.layers);
  compress_round(trace.rounds[0], warm, params);
  std::size_t bytes = 0;
  for (const auto& g : trace.rounds[1]) bytes += 4 * g.values.size();
  for (auto _ : state) {
    ClientState s = warm;
    benchmark::DoNotOptimize(compress_round(trace.rounds[1], s, params));
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * std::int64_t(bytes));
}
BENCHMARK(BM_CompressRound)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DecompressRound(benchmark::State& state) {
  SynthConfig cfg;
  cfg.layers = {parse_layer_spec("conv2:64x32x3x3"), parse_layer_spec("conv3:128x64x3x3"),
                parse_layer_spec("fc:10x2048")};
  cfg.rounds = 2;
  const auto trace = synth_trace(cfg);
  PipelineParams params;
  ClientState c = ClientState::init(trace.layers);
  ServerState warm = ServerState::init(trace.layers);
  decompress_round(compress_round(trace.rounds[0], c, params).payload, warm, params);
  const auto payload = compress_round(trace.rounds[1], c, params).payload;
  std::size_t bytes = 0;
  for (const auto& g : trace.rounds[1]) bytes += 4 * g.values.size();
  for (auto _ : state) {
    ServerState s = warm;
    benchmark::DoNotOptimize(decompress_round(payload, s, params));
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * std::int64_t(bytes));
}
BENCHMARK(BM_DecompressRound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
