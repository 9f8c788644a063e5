#include <benchmark/benchmark.h>

#include <complex>
#include <cstdint>

#include "trsq/avg_case.hpp"
#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"
#include "trsq/degrade.hpp"
#include "trsq/lower_bounds.hpp"
#include "trsq/poly_engine.hpp"
#include "trsq/rng.hpp"
#include "trsq/sq_oracle.hpp"
#include "trsq/worst_case.hpp"

namespace {

using namespace trsq;

BitString source(std::size_t n, std::uint64_t seed = 42) {
  Rng rng(seed);
  return BitString::random(n, rng);
}

void BM_OneBitStats(benchmark::State& state) {
  const BitString x = source(std::size_t(state.range(0)));
  const ChannelParams ch = ChannelParams::of(0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(exact_one_bit_stats(x, ch));
}
BENCHMARK(BM_OneBitStats)->Arg(64)->Arg(256)->Arg(1024);

void BM_SubwordSignature(benchmark::State& state) {
  const BitString x = source(std::size_t(state.range(0)));
  const ChannelParams ch = ChannelParams::of(0.5);
  const unsigned ell = unsigned(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(exact_subword_signature(x, ch, ell));
}
BENCHMARK(BM_SubwordSignature)
    ->Args({64, 2})
    ->Args({64, 4})
    ->Args({256, 2})
    ->Args({256, 4})
    ->Args({1024, 2});

void BM_BruteForceSignature(benchmark::State& state) {
  const BitString x = source(std::size_t(state.range(0)));
  const ChannelParams ch = ChannelParams::of(0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(brute_force_signature(x, ch, 2));
}
BENCHMARK(BM_BruteForceSignature)->Arg(10)->Arg(14)->Arg(18);

void BM_SampleTrace(benchmark::State& state) {
  const BitString x = source(1024);
  const ChannelParams ch = ChannelParams::of(0.5);
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sample_trace(x, ch, rng));
}
BENCHMARK(BM_SampleTrace);

void BM_MeanBasedReconstruct(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const BitString x = source(n);
  const ChannelParams ch = ChannelParams::of(0.5);
  const double tau = 0.2 * std::pow(0.5, double(n));
  for (auto _ : state) {
    SqOracle oracle({OracleBackend::kExact, NoiseMode::kNone}, x, ch);
    benchmark::DoNotOptimize(mean_based_reconstruct(oracle, tau));
  }
}
BENCHMARK(BM_MeanBasedReconstruct)->Arg(16)->Arg(32)->Arg(48);

void BM_PairwiseReconstruct(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const BitString x = source(n);
  const ChannelParams ch = ChannelParams::of(0.5);
  const WorstCaseParams pr = WorstCaseParams::for_length(std::uint32_t(n));
  for (auto _ : state) {
    SqOracle oracle({OracleBackend::kExact, NoiseMode::kNone}, x, ch);
    benchmark::DoNotOptimize(pairwise_reconstruct(oracle, pr));
  }
}
BENCHMARK(BM_PairwiseReconstruct)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_EstimateSW(benchmark::State& state) {
  const std::uint32_t n = std::uint32_t(state.range(0));
  const BitString x = source(n);
  const ChannelParams ch = ChannelParams::of(0.5);
  const AvgParams pr = avg_params(n, 0.01, ch);
  SqOracle oracle({OracleBackend::kExact, NoiseMode::kNone}, x, ch);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_SW(oracle, pr, 1, pr.grid_top()));
}
BENCHMARK(BM_EstimateSW)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_DegradeSubwordStats(benchmark::State& state) {
  // window near the end so a 16-wide input signature covers the full reach
  const std::size_t n = 40;
  const BitString x = source(n);
  const DegradeSpec spec = DegradeSpec::make(0.3, 0.6, 16, 3, 1e-3);
  const SubwordSignature sig =
      exact_subword_signature(x, ChannelParams::of(0.3), 16);
  for (auto _ : state)
    benchmark::DoNotOptimize(degrade_subword_stats(sig, spec, 24));
}
BENCHMARK(BM_DegradeSubwordStats);

void BM_TraceSideQ(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const BitString x = source(n);
  const ChannelParams ch = ChannelParams::of(0.5);
  const Complex z(std::cos(0.05), std::sin(0.05));
  const Complex t(0.6, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(trace_side_Q(x, ch, 3, 5, z, t, n - 3));
}
BENCHMARK(BM_TraceSideQ)->Arg(16)->Arg(24)->Arg(32);

void BM_ConstructHardPair(benchmark::State& state) {
  const std::uint32_t n = std::uint32_t(state.range(0));
  const ChannelParams ch = ChannelParams::of(0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(construct_hard_pair(n, ch));
}
BENCHMARK(BM_ConstructHardPair)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CertifyPair(benchmark::State& state) {
  const std::uint32_t n = std::uint32_t(state.range(0));
  const ChannelParams ch = ChannelParams::of(0.5);
  const HardPair hp = construct_hard_pair(n, ch);
  for (auto _ : state)
    benchmark::DoNotOptimize(certify_pair(hp.a, hp.a2, ch, 2));
}
BENCHMARK(BM_CertifyPair)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MiddleBitGap(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const BitString x = source(n);
  const ChannelParams ch = ChannelParams::of(0.5);
  JuntaQuery q;
  q.positions = {std::uint32_t(n / 2 - 2), std::uint32_t(n / 2),
                 std::uint32_t(n / 2 + 3)};
  q.table = {0.3, -0.7, 0.9, -0.1, 0.5, -0.4, 0.2, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(middle_bit_gap(x, ch, q));
}
BENCHMARK(BM_MiddleBitGap)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
