// Parallel batch kernels against their serial references.
#include <benchmark/benchmark.h>

#include "corpus.hpp"
#include "nsvqa/executor.hpp"
#include "nsvqa/rng.hpp"
#include "nsvqa/testgen.hpp"

using namespace nsvqa;

namespace {

const testing::Corpus& corpus() {
  static const testing::Corpus c = testing::make_covr_corpus(kDefaultSeed, 3000, 1500);
  return c;
}

std::vector<std::string> pool() {
  std::vector<std::string> out;
  for (const auto& img : corpus().images) out.push_back(img.id);
  return out;
}

void BM_ExecuteSerial(benchmark::State& state) {
  const auto items = batch_items_from_examples(corpus().examples);
  for (auto _ : state) benchmark::DoNotOptimize(execute_batch_serial(items, corpus().graphs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(items.size()));
}

void BM_ExecuteParallel(benchmark::State& state) {
  const auto items = batch_items_from_examples(corpus().examples);
  BatchOptions opts;
  opts.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(execute_batch(items, corpus().graphs, nullptr, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(items.size()));
}

void BM_SegmentCombineSerial(benchmark::State& state) {
  const auto p = pool();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen_segment_combine_batch_serial(corpus().examples, corpus().graphs, p, kDefaultSeed));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus().examples.size()));
}

void BM_SegmentCombineParallel(benchmark::State& state) {
  const auto p = pool();
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gen_segment_combine_batch(corpus().examples, corpus().graphs, p, kDefaultSeed, nullptr, jobs));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus().examples.size()));
}

}  // namespace

BENCHMARK(BM_ExecuteSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExecuteParallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SegmentCombineSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SegmentCombineParallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
