#include <benchmark/benchmark.h>

#include <cstdio>
#include <random>

#include "memcl/diagnostics.hpp"
#include "memcl/retrieval.hpp"
#include "memcl/world.hpp"

using namespace memcl;

namespace {

const std::vector<std::string> kVocab = {"go",   "to",   "the",  "door", "open",  "scan",
                                         "room", "ball", "key",  "box",  "red",   "blue",
                                         "find", "pick", "up",   "a",    "clean", "mug",
                                         "put",  "in",   "sink", "shelf", "green", "grey"};

std::string phrase(std::mt19937_64& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + kVocab[rng() % kVocab.size()];
  return s;
}

ExperiencePool random_pool(std::size_t n) {
  std::mt19937_64 rng(7);
  auto p = new_pool(Condition::ind, Representation::insight);
  for (std::size_t i = 1; i <= n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "u%06zu", i);
    p.append_unit({id, phrase(rng, 12), phrase(rng, 20), UnitKind::insight_single, "A", "e", i,
                   Outcome::success});
  }
  return p;
}

}  // namespace

static void BM_Retrieve(benchmark::State& state) {
  const auto pool = random_pool(static_cast<std::size_t>(state.range(0)));
  Bm25Index idx;
  idx.sync(pool);
  std::mt19937_64 rng(3);
  const Query q{phrase(rng, 8), "e", 0};
  for (auto _ : state) benchmark::DoNotOptimize(retrieve(pool, idx, q, 3, {}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Retrieve)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

static void BM_IndexSync(benchmark::State& state) {
  const auto pool = random_pool(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Bm25Index idx;
    idx.sync(pool);
    benchmark::DoNotOptimize(idx.doc_count());
  }
}
BENCHMARK(BM_IndexSync)->Arg(200)->Arg(1200);

static void BM_Diversity(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<std::string> texts;
  for (int i = 0; i < state.range(0); ++i) texts.push_back(phrase(rng, 15));
  for (auto _ : state) benchmark::DoNotOptimize(mean_pairwise_diversity(tfidf_vectors(texts)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Diversity)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

static void BM_Episode(benchmark::State& state) {
  const auto tasks = generate_tasks(WorldKind::gridfind, Family::B, 50, 42);
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        run_episode(tasks[i++ % tasks.size()], std::nullopt, Condition::agg, {}, 42));
}
BENCHMARK(BM_Episode);
BENCHMARK_MAIN();
