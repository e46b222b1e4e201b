#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>

#include "doctest.h"
#include "jeseme/corpus.hpp"
#include "jeseme/error.hpp"
#include "synthetic.hpp"

using namespace jeseme;
using namespace jeseme::corpus;

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

void check_partition(const std::vector<TimeSlice>& slices, int first, int last) {
  REQUIRE_FALSE(slices.empty());
  CHECK(slices.front().start_year == first);
  CHECK(slices.back().end_year == last);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    CHECK(slices[i].slice_id == static_cast<int>(i));
    CHECK(slices[i].label_year == slices[i].start_year);
    CHECK(slices[i].start_year <= slices[i].end_year);
    if (i > 0) CHECK(slices[i].start_year == slices[i - 1].end_year + 1);
  }
}

}  // namespace

TEST_CASE("normalize_token lowercases english and looks up german lemmas") {
  CHECK(normalize_token("Heart", Language::kEnglish) == "heart");
  CHECK(normalize_token("heart", Language::kEnglish) == "heart");
  CHECK(normalize_token("ÄRGER", Language::kEnglish) == "ärger");

  const auto table = LemmaTable::from_pairs({{"herzens", "herz"}, {"Herzen", "herz"}});
  CHECK(normalize_token("Herzens", Language::kGerman, &table) == "herz");
  CHECK(normalize_token("HERZEN", Language::kGerman, &table) == "herz");
  CHECK(normalize_token("Liebe", Language::kGerman, &table) == "liebe");
  CHECK(normalize_token("Liebe", Language::kGerman) == "liebe");
}

TEST_CASE("normalize_token is idempotent for both languages") {
  const auto table = LemmaTable::from_pairs({{"ward", "wurde"}, {"wurde", "werden"}, {"thür", "tür"}, {"Tür", "tür"}});
  const std::vector<std::string> inputs{"Ward", "WURDE", "Thür", "tür", "Straße", "ÖL", "plain", "MiXeD", "Ärger"};
  for (const auto& raw : inputs) {
    const auto en = normalize_token(raw, Language::kEnglish);
    CHECK(normalize_token(en, Language::kEnglish) == en);
    const auto de = normalize_token(raw, Language::kGerman, &table);
    CHECK(normalize_token(de, Language::kGerman, &table) == de);
  }
  CHECK(normalize_token("ward", Language::kGerman, &table) == "werden");
}

TEST_CASE("english normalizer refuses a lemma table") {
  CHECK(code_of([] { Normalizer n(Language::kEnglish, LemmaTable::from_pairs({{"a", "b"}})); }) ==
        ErrorCode::kInvalidManifest);
}

TEST_CASE("tokenizer strips punctuation and splits on whitespace") {
  const Tokenizer tokenizer;
  CHECK(tokenizer.tokenize("Heart, soul; and\tmind.\n") == std::vector<std::string>{"Heart", "soul", "and", "mind"});
  CHECK(tokenizer.tokenize("   ").empty());
  const Tokenizer digits("[0-9]+");
  CHECK(digits.tokenize("a1b 22 c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("fixed span slicing partitions by decade") {
  const std::vector<DocumentMass> docs{{1830, 5}, {1835, 5}, {1844, 7}, {1850, 1}, {1859, 2}};
  SlicingConfig config;
  config.span_years = 10;
  const auto slices = build_slices(docs, config);
  REQUIRE(slices.size() == 3);
  check_partition(slices, 1830, 1859);
  CHECK(slices[0].end_year == 1839);
  CHECK(slices[1].start_year == 1840);
  CHECK(slices[0].token_count == 10);
  CHECK(slices[1].token_count == 7);
  CHECK(slices[2].token_count == 3);
}

TEST_CASE("fixed span slicing of a single year gives one slice") {
  const std::vector<DocumentMass> docs{{1900, 3}, {1900, 4}};
  const auto slices = build_slices(docs, SlicingConfig{});
  REQUIRE(slices.size() == 1);
  CHECK(slices[0].start_year == 1900);
  CHECK(slices[0].end_year == 1900);
  CHECK(slices[0].token_count == 7);
}

TEST_CASE("fixed span slicing errors") {
  CHECK(code_of([] { build_slices(std::vector<DocumentMass>{}, SlicingConfig{}); }) == ErrorCode::kEmptyCorpus);
  const std::vector<DocumentMass> gap{{1800, 1}, {1830, 1}};
  CHECK(code_of([&] { build_slices(gap, SlicingConfig{}); }) == ErrorCode::kInfeasibleSlicing);
  SlicingConfig too_long;
  too_long.span_years = 60;
  CHECK(code_of([&] { build_slices(gap, too_long); }) == ErrorCode::kInfeasibleSlicing);
}

TEST_CASE("balanced slicing follows the hand-run greedy sweep") {
  const std::vector<DocumentMass> docs{{1900, 100}, {1910, 100}, {1920, 100}, {1930, 100}};
  SlicingConfig config;
  config.mode = SlicingMode::kBalanced;
  config.target_slices = 2;
  const auto slices = build_slices(docs, config);
  REQUIRE(slices.size() == 2);
  CHECK(slices[0].start_year == 1900);
  CHECK(slices[0].end_year == 1919);
  CHECK(slices[1].start_year == 1920);
  CHECK(slices[1].end_year == 1930);
  CHECK(slices[0].token_count == 200);
  CHECK(slices[1].token_count == 200);
}

TEST_CASE("balanced slicing respects span bounds and balances mass") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int years = 60 + static_cast<int>(rng() % 140);
    const int first = 1700 + static_cast<int>(rng() % 100);
    std::vector<DocumentMass> docs;
    std::int64_t total = 0;
    for (int y = 0; y < years; ++y) {
      const std::int64_t mass = 50 + static_cast<std::int64_t>(rng() % 200);
      docs.push_back({first + y, mass});
      total += mass;
    }
    std::int64_t heaviest_year = 0;
    for (const auto& d : docs) heaviest_year = std::max(heaviest_year, d.tokens);
    REQUIRE(heaviest_year * 4 <= total);

    SlicingConfig config;
    config.mode = SlicingMode::kBalanced;
    config.target_slices = 2 + static_cast<int>(rng() % 4);
    const auto slices = build_slices(docs, config);
    check_partition(slices, first, first + years - 1);
    std::int64_t sum = 0, lo = slices.front().token_count, hi = lo;
    for (const auto& s : slices) {
      CHECK(s.span() >= 10);
      CHECK(s.span() <= 50);
      sum += s.token_count;
      lo = std::min(lo, s.token_count);
      hi = std::max(hi, s.token_count);
    }
    CHECK(sum == total);
    CHECK(static_cast<double>(hi) / static_cast<double>(lo) <= 3.0);
  }
}

TEST_CASE("balanced slicing rejects gaps longer than the maximum span") {
  const std::vector<DocumentMass> docs{{1800, 10}, {1801, 10}, {1900, 10}};
  SlicingConfig config;
  config.mode = SlicingMode::kBalanced;
  config.target_slices = 3;
  CHECK(code_of([&] { build_slices(docs, config); }) == ErrorCode::kInfeasibleSlicing);
}

TEST_CASE("build_vocabulary counts, filters and orders") {
  const std::vector<std::string> tokens{"a", "a", "b"};
  const auto v1 = build_vocabulary(tokens, 1);
  REQUIRE(v1.size() == 2);
  CHECK(v1.id("a") == 0);
  CHECK(v1.id("b") == 1);
  CHECK(v1.count(0) == 2);
  CHECK(v1.count(1) == 1);

  const auto v2 = build_vocabulary(tokens, 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.contains("a"));
  CHECK_FALSE(v2.contains("b"));

  const std::vector<std::string> ties{"c", "b", "a", "b", "c", "a"};
  const auto v3 = build_vocabulary(ties, 1);
  CHECK(v3.words() == std::vector<std::string>{"a", "b", "c"});

  CHECK(code_of([&] { build_vocabulary(tokens, 3); }) == ErrorCode::kEmptyVocabulary);
}

TEST_CASE("build_vocabulary matches a hash-count oracle on a 1M-token stream") {
  std::mt19937_64 rng(5);
  std::vector<double> weights(3000);
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
  std::vector<std::string> tokens;
  tokens.reserve(1'000'000);
  for (int i = 0; i < 1'000'000; ++i) tokens.push_back("t" + std::to_string(draw(rng)));

  std::unordered_map<std::string, std::int64_t> oracle;
  for (const auto& t : tokens) ++oracle[t];
  std::vector<std::pair<std::string, std::int64_t>> expected;
  for (const auto& [w, c] : oracle) {
    if (c >= 10) expected.emplace_back(w, c);
  }
  std::sort(expected.begin(), expected.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });

  const auto vocab = build_vocabulary(tokens, 10);
  REQUIRE(vocab.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(vocab.word(static_cast<WordId>(i)) == expected[i].first);
    CHECK(vocab.count(static_cast<WordId>(i)) == expected[i].second);
  }
  const auto again = build_vocabulary(tokens, 10);
  CHECK(again.words() == vocab.words());
}

TEST_CASE("encode_documents keeps OOV positions") {
  const std::vector<std::vector<std::string>> docs{{"a", "x", "b"}, {"b"}};
  const auto vocab = build_vocabulary(std::vector<std::string>{"a", "b", "b"}, 1);
  const auto encoded = encode_documents(docs, vocab);
  CHECK(encoded[0] == std::vector<WordId>{1, -1, 0});
  CHECK(encoded[1] == std::vector<WordId>{0});
}

TEST_CASE("manifest parsing and validation") {
  const auto m = CorpusManifest::from_json_text(
      R"({"corpus_id":"c","language":"german","slicing":{"mode":"balanced","target_slices":3},
          "lemma_table":"lemmas.tsv","documents":[{"year":1850,"path":"a.txt"}]})",
      "/data");
  CHECK(m.corpus_id == "c");
  CHECK(m.language == Language::kGerman);
  CHECK(m.slicing.mode == SlicingMode::kBalanced);
  CHECK(m.slicing.target_slices == 3);
  CHECK(m.lemma_table_path == std::filesystem::path("/data/lemmas.tsv"));
  CHECK(m.documents.at(0).path == std::filesystem::path("/data/a.txt"));

  CHECK(code_of([] {
          CorpusManifest::from_json_text(R"({"corpus_id":"c","language":"english","lemma_table":"x.tsv"})", "");
        }) == ErrorCode::kInvalidManifest);
  CHECK(code_of([] {
          CorpusManifest::from_json_text(
              R"({"corpus_id":"c","language":"english","documents":[{"year":900,"path":"a"}]})", "");
        }) == ErrorCode::kInvalidManifest);
  CHECK(code_of([] { CorpusManifest::from_json_text(R"({"corpus_id":"","language":"english"})", ""); }) ==
        ErrorCode::kInvalidManifest);
  CHECK(code_of([] { CorpusManifest::from_json_text(R"({"corpus_id":"c","language":"latin"})", ""); }) ==
        ErrorCode::kInvalidManifest);
  CHECK(code_of([] { CorpusManifest::from_json_text("{not json", ""); }) == ErrorCode::kInvalidManifest);
}

TEST_CASE("load_corpus normalizes a german corpus through its lemma table") {
  const auto dir = testing::temp_dir("german");
  std::ofstream(dir / "lemmas.tsv") << "Herzens\therz\nherzen\therz\n";
  std::ofstream(dir / "a.txt") << "Des Herzens Freude, des HERZEN Leid.";
  std::ofstream(dir / "manifest.json")
      << R"({"corpus_id":"de","language":"german","lemma_table":"lemmas.tsv","documents":[{"year":1800,"path":"a.txt"}]})";
  const auto corpus = load_corpus(CorpusManifest::load(dir / "manifest.json"), Tokenizer{});
  REQUIRE(corpus.documents.size() == 1);
  CHECK(corpus.documents[0].tokens ==
        std::vector<std::string>{"des", "herz", "freude", "des", "herz", "leid"});
  const auto slices = build_slices(corpus);
  REQUIRE(slices.size() == 1);
  CHECK(slices[0].token_count == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic corpus slices carry the documents' token mass") {
  const auto dir = testing::temp_dir("synthetic_corpus");
  auto spec = testing::demo_spec();
  for (auto& s : spec.slices) s.tokens = 2000;
  const auto files = testing::write_synthetic(dir, spec);
  const auto corpus = load_corpus(CorpusManifest::load(files.manifest), Tokenizer{});
  const auto slices = build_slices(corpus);
  REQUIRE(slices.size() == 3);
  int last_year = 0;
  for (const auto& doc : corpus.documents) last_year = std::max(last_year, doc.year);
  CHECK(last_year >= 1850);
  check_partition(slices, 1830, last_year);
  const auto members = assign_documents(corpus, slices);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    std::int64_t tokens = 0;
    for (std::size_t d : members[i]) tokens += static_cast<std::int64_t>(corpus.documents[d].tokens.size());
    CHECK(tokens == slices[i].token_count);
    CHECK(tokens >= 2000);
  }
  std::filesystem::remove_all(dir);
}
