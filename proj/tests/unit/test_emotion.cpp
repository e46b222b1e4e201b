#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "jeseme/emotion.hpp"
#include "jeseme/error.hpp"
#include "oracles.hpp"

using namespace jeseme;
using namespace jeseme::emotion;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected jeseme::Error");
  return ErrorCode::kIoError;
}

struct Toy {
  corpus::Vocabulary vocab;
  embed::EmbeddingModel model;
};

// Words w0..w{n-1}, vectors given row-major.
Toy make_toy(const std::vector<std::vector<float>>& rows) {
  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  std::vector<float> flat;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    words.push_back("w" + std::to_string(i));
    counts.push_back(static_cast<std::int64_t>(100 - i));
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return {corpus::Vocabulary::from_entries(words, counts, 1),
          embed::EmbeddingModel(0, rows.front().size(), std::move(flat))};
}

}  // namespace

TEST_CASE("single usable seed returns its ratings exactly") {
  const auto toy = make_toy({{1, 0, 0}, {4, 3, 0}, {-1, 0, 0}});
  const SeedLexicon seeds(corpus::Language::kEnglish, {{"w1", {7, 3, 5}}, {"w2", {1, 1, 1}}});
  const auto score = induce_emotion("w0", toy.vocab, toy.model, seeds, 0.0);
  CHECK(score == VadScore{7, 3, 5});
}

TEST_CASE("two seeds with similarities 0.5 and 0.25 give valence 6") {
  const auto toy = make_toy({{1, 0, 0, 0, 0}, {1, 1, 1, 1, 0}, {1, 1, 1, 2, 3}});
  const SeedLexicon seeds(corpus::Language::kEnglish, {{"w1", {8, 5, 5}}, {"w2", {2, 5, 5}}});
  const auto score = induce_emotion("w0", toy.vocab, toy.model, seeds, 0.0);
  CHECK(score.valence == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("target is excluded from its own seed set and failures are typed") {
  const auto toy = make_toy({{1, 0}, {0, 1}, {-1, 0}});
  const SeedLexicon seeds(corpus::Language::kEnglish, {{"w0", {9, 9, 9}}, {"w1", {5, 5, 5}}, {"w2", {1, 1, 1}}});
  CHECK(code_of([&] { induce_emotion("w0", toy.vocab, toy.model, seeds, 0.0); }) == ErrorCode::kNoUsableSeeds);
  CHECK(code_of([&] { induce_emotion("nope", toy.vocab, toy.model, seeds, 0.0); }) == ErrorCode::kUnknownWord);
  // non-positive similarities never carry weight, whatever the threshold
  CHECK(code_of([&] { induce_emotion("w0", toy.vocab, toy.model, seeds, -0.5); }) == ErrorCode::kNoUsableSeeds);
}

TEST_CASE("20-word toy model matches the direct equation and stays convex") {
  std::mt19937_64 rng(31);
  std::normal_distribution<float> normal;
  std::uniform_real_distribution<double> rating(1.0, 9.0);
  std::vector<std::vector<float>> rows(20, std::vector<float>(6));
  for (auto& row : rows) {
    for (auto& x : row) x = normal(rng);
  }
  const auto toy = make_toy(rows);
  std::map<std::string, VadScore> entries;
  for (int i = 0; i < 20; i += 2) entries["w" + std::to_string(i)] = {rating(rng), rating(rng), rating(rng)};
  const SeedLexicon seeds(corpus::Language::kEnglish, entries);

  for (double threshold : {0.0, 0.1, 0.3}) {
    for (int i = 0; i < 20; ++i) {
      const std::string word = "w" + std::to_string(i);
      std::vector<double> target(rows[static_cast<std::size_t>(i)].begin(), rows[static_cast<std::size_t>(i)].end());
      std::vector<std::vector<double>> seed_vectors;
      std::vector<VadScore> seed_scores;
      for (const auto& [seed, score] : entries) {
        if (seed == word) continue;
        const auto& r = rows[static_cast<std::size_t>(std::stoi(seed.substr(1)))];
        seed_vectors.emplace_back(r.begin(), r.end());
        seed_scores.push_back(score);
      }
      const auto expected = testing::direct_induce(target, seed_vectors, seed_scores, threshold);
      if (!expected) {
        CHECK(code_of([&] { induce_emotion(word, toy.vocab, toy.model, seeds, threshold); }) ==
              ErrorCode::kNoUsableSeeds);
        continue;
      }
      const auto got = induce_emotion(word, toy.vocab, toy.model, seeds, threshold);
      for (std::size_t d = 0; d < kVadDimensions; ++d) {
        CHECK(std::abs(got[d] - (*expected)[d]) <= 1e-12);
        double lo = 9, hi = 1;
        for (const auto& s : seed_scores) {
          lo = std::min(lo, s[d]);
          hi = std::max(hi, s[d]);
        }
        CHECK(got[d] >= lo);
        CHECK(got[d] <= hi);
      }
    }
  }
}

TEST_CASE("induction is invariant to vector scaling and seed order") {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> normal;
  std::vector<std::vector<float>> rows(12, std::vector<float>(4)), scaled = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      rows[i][j] = normal(rng);
      scaled[i][j] = rows[i][j] * 2.0f;
    }
  }
  const auto toy = make_toy(rows);
  const auto toy_scaled = make_toy(scaled);
  const SeedLexicon seeds(corpus::Language::kEnglish,
                          {{"w3", {2, 3, 4}}, {"w5", {8, 7, 6}}, {"w7", {5, 5, 5}}, {"w9", {1, 9, 2}}});
  const SeedIndex index(seeds, toy.vocab);
  for (WordId w = 0; w < 12; ++w) {
    const auto a = try_induce(w, toy.model, index, -1.0);
    const auto b = try_induce(w, toy_scaled.model, SeedIndex(seeds, toy_scaled.vocab), -1.0);
    REQUIRE(a.has_value() == b.has_value());
    if (!a) continue;
    for (std::size_t d = 0; d < kVadDimensions; ++d) CHECK(std::abs((*a)[d] - (*b)[d]) <= 1e-12);
  }
}

TEST_CASE("seed lexicon CSV parsing") {
  const auto seeds = SeedLexicon::parse_csv("word,valence,arousal,dominance\nHeart,7.5,5,6\nheart,1,1,1\nfear,2,7,3\n",
                                            corpus::Language::kEnglish,
                                            std::make_unique<corpus::Normalizer>(corpus::Language::kEnglish).get());
  CHECK(seeds.size() == 2);
  REQUIRE(seeds.find("heart"));
  CHECK(*seeds.find("heart") == VadScore{7.5, 5, 6});
  CHECK_THROWS_AS(SeedLexicon::parse_csv("word,v,a,d\nx,1,1,1\n", corpus::Language::kEnglish), Error);
  CHECK_THROWS_AS(SeedLexicon::parse_csv("word,valence,arousal,dominance\nx,0.5,1,1\n", corpus::Language::kEnglish),
                  Error);
  CHECK_THROWS_AS(SeedLexicon::parse_csv("word,valence,arousal,dominance\n", corpus::Language::kEnglish), Error);
  CHECK_THROWS_AS(SeedLexicon::parse_csv("word,valence,arousal,dominance\nx,abc,1,1\n", corpus::Language::kEnglish),
                  Error);
}

TEST_CASE("induce_lexicon omits missing words per slice") {
  const auto a = make_toy({{1, 0}, {1, 0.1f}, {0, 1}});
  const auto b = make_toy({{1, 0}, {0, 1}});
  const std::vector<SliceEmbedding> slices{{0, &a.vocab, &a.model}, {1, &b.vocab, &b.model}};
  const SeedLexicon seeds(corpus::Language::kEnglish, {{"w0", {8, 2, 7}}, {"w1", {3, 3, 3}}});
  const std::vector<std::string> targets{"w2", "w0"};
  std::vector<std::string> reasons;
  const auto lexicon = induce_lexicon(slices, seeds, targets, 0.0, [&](int slice, const std::string& word, std::string_view why) {
    reasons.push_back(std::to_string(slice) + ":" + word + ":" + std::string(why));
  });
  CHECK(lexicon.contains({0, "w0"}));
  CHECK(lexicon.contains({0, "w2"}));
  CHECK_FALSE(lexicon.contains({1, "w2"}));
  CHECK(std::find(reasons.begin(), reasons.end(), "1:w2:UnknownWord") != reasons.end());

  std::ostringstream csv;
  write_induced_csv(csv, lexicon);
  CHECK(csv.str().rfind("word,slice,valence,arousal,dominance\n", 0) == 0);
}

TEST_CASE("zscale_series") {
  const auto z = zscale_series(std::vector<double>{1, 2, 3});
  CHECK(z[0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(z[1] == doctest::Approx(0.0));
  CHECK(z[2] == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK(zscale_series(std::vector<double>{5, 5, 5}) == std::vector<double>{0, 0, 0});
  CHECK(zscale_series(std::vector<double>{4}) == std::vector<double>{0});

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1, 9);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(2 + rng() % 10);
    for (auto& x : v) x = u(rng);
    const auto out = zscale_series(v);
    const auto oracle = testing::direct_zscale(v);
    double mean = 0, var = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(std::abs(out[i] - oracle[i]) <= 1e-12);
      mean += out[i];
    }
    mean /= static_cast<double>(out.size());
    for (double x : out) var += (x - mean) * (x - mean);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(std::sqrt(var / static_cast<double>(out.size())) - 1.0) <= 1e-9);
  }
}

TEST_CASE("EmotionSeries display points are z-scaled per dimension") {
  const auto series = EmotionSeries::from_points("heart", {{0, {8, 5, 7}}, {1, {5, 5, 4}}, {2, {2, 5, 1}}});
  REQUIRE(series.display_points.size() == 3);
  CHECK(series.display_points[0].slice_id == 0);
  CHECK(series.display_points[0].score.valence == doctest::Approx(1.224744871391589));
  CHECK(series.display_points[1].score.arousal == 0.0);
  CHECK(series.display_points[2].score.dominance == doctest::Approx(-1.224744871391589));
  const auto single = EmotionSeries::from_points("x", {{3, {8, 5, 7}}});
  CHECK(single.display_points[0].score == VadScore{0, 0, 0});
}
