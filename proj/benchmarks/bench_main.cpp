#include <benchmark/benchmark.h>

#include <random>

#include "jeseme/cooc.hpp"
#include "jeseme/embed.hpp"
#include "jeseme/emotion.hpp"

using namespace jeseme;

namespace {

// Zipf-ish token ids over a vocabulary of `vocab` words.
std::vector<std::vector<WordId>> token_stream(std::size_t tokens, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights(vocab);
  for (std::size_t i = 0; i < vocab; ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<std::vector<WordId>> docs(8);
  for (std::size_t i = 0; i < tokens; ++i) docs[i % docs.size()].push_back(pick(rng));
  return docs;
}

embed::PpmiMatrix ppmi_of(std::size_t tokens, std::size_t vocab) {
  const auto counts = cooc::count_cooccurrences(token_stream(tokens, vocab, 1), vocab, 4);
  return embed::ppmi(counts, 0.75);
}

corpus::Vocabulary numbered_vocab(std::size_t n) {
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%06zu", i);
    words.emplace_back(buf);
    counts.push_back(static_cast<std::int64_t>(10 * n - i));
  }
  return corpus::Vocabulary::from_entries(words, counts, 1);
}

embed::EmbeddingModel random_model(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> normal;
  std::vector<float> values(n * d);
  for (auto& v : values) v = normal(rng);
  return embed::EmbeddingModel(0, d, std::move(values));
}

void BM_Cooccurrence(benchmark::State& state) {
  const auto docs = token_stream(static_cast<std::size_t>(state.range(0)), 2000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cooc::count_cooccurrences(docs, 2000, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Cooccurrence)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_Ppmi(benchmark::State& state) {
  const auto counts = cooc::count_cooccurrences(token_stream(500000, static_cast<std::size_t>(state.range(0)), 1),
                                                static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(embed::ppmi(counts, 0.75));
  state.counters["nnz"] = static_cast<double>(counts.nnz());
}
BENCHMARK(BM_Ppmi)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_RandomizedSvd(benchmark::State& state) {
  const auto ppmi = ppmi_of(500000, static_cast<std::size_t>(state.range(0)));
  const int d = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed::randomized_svd(ppmi.matrix(), d, {.max_power_iterations = 30, .tolerance = 1e-10}));
  }
}
BENCHMARK(BM_RandomizedSvd)->Args({2000, 50})->Args({5000, 100})->Unit(benchmark::kMillisecond);

void BM_TopKSimilar(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto vocab = numbered_vocab(n);
  const auto model = random_model(n, 300);
  WordId w = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed::top_k_similar(w, vocab, model, 10, true));
    w = static_cast<WordId>((static_cast<std::size_t>(w) + 1) % n);
  }
}
BENCHMARK(BM_TopKSimilar)->Arg(10000)->Arg(50000)->Unit(benchmark::kMicrosecond);

void BM_EmotionInduction(benchmark::State& state) {
  const std::size_t n = 20000;
  const auto vocab = numbered_vocab(n);
  const auto model = random_model(n, 300);
  std::map<std::string, emotion::VadScore> entries;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rating(1, 9);
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
    entries[vocab.word(static_cast<WordId>(rng() % n))] = {rating(rng), rating(rng), rating(rng)};
  }
  const emotion::SeedLexicon seeds(corpus::Language::kEnglish, entries);
  const emotion::SeedIndex index(seeds, vocab);
  WordId w = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(emotion::try_induce(w, model, index, 0.0));
    w = static_cast<WordId>((static_cast<std::size_t>(w) + 1) % n);
  }
}
BENCHMARK(BM_EmotionInduction)->Arg(1000)->Arg(14000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
