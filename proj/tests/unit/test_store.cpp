#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "jeseme/error.hpp"
#include "jeseme/store.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace jeseme;
using namespace jeseme::store;

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

ModelStore toy_store(std::size_t words = 40, int dim = 8, int slices = 3) {
  ModelStore store;
  store.put_corpus(testing::toy_info("toy", dim, 5));
  for (int s = 0; s < slices; ++s) {
    store.write_slice("toy", testing::random_slice(s, 1900 + 10 * s, words, dim, 5, 100 + static_cast<unsigned>(s)));
  }
  return store;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("table names round-trip") {
  for (Table t : all_tables()) CHECK(parse_table(to_string(t)) == t);
  CHECK(all_tables().size() == 8);
  CHECK(code_of([] { parse_table("nope"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("serialize/deserialize is bit exact and idempotent") {
  const auto store = toy_store();
  const std::string bytes = store.serialize();
  CHECK(bytes.rfind("JESEMEST", 0) == 0);
  const auto loaded = ModelStore::deserialize(bytes);
  CHECK(loaded.serialize() == bytes);
  CHECK(loaded.corpus("toy") == store.corpus("toy"));

  const auto a = store.slices("toy");
  const auto b = loaded.slices("toy");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(same_bits(a[i]->model.data(), b[i]->model.data()));
    CHECK(a[i]->slice == b[i]->slice);
    CHECK(a[i]->vocab.words() == b[i]->vocab.words());
    CHECK(a[i]->vocab.counts() == b[i]->vocab.counts());
    CHECK(a[i]->emotions == b[i]->emotions);
    CHECK(a[i]->top_similar == b[i]->top_similar);
    CHECK(a[i]->contexts == b[i]->contexts);
    CHECK(slice_checksum("toy", *a[i]) == slice_checksum("toy", *b[i]));
  }
}

TEST_CASE("special float values survive the round trip") {
  ModelStore store;
  store.put_corpus(testing::toy_info("f", 4, 2));
  auto record = testing::random_slice(0, 1900, 6, 4, 2, 1);
  std::vector<float> values = record.model.data();
  values[0] = -0.0f;
  values[1] = std::numeric_limits<float>::denorm_min();
  values[2] = std::numeric_limits<float>::max();
  values[3] = 1.0f / 3.0f;
  record.model = embed::EmbeddingModel(0, 4, values);
  for (std::size_t w = 0; w < 6; ++w) {
    record.top_similar[w] = embed::top_k_similar(static_cast<WordId>(w), record.vocab, record.model, 2, true);
  }
  store.write_slice("f", record);
  const auto loaded = ModelStore::deserialize(store.serialize());
  CHECK(same_bits(loaded.slices("f")[0]->model.data(), values));
}

TEST_CASE("corrupt files are rejected with FormatError") {
  const std::string bytes = toy_store(10, 4, 1).serialize();
  CHECK(code_of([] { ModelStore::deserialize("garbage"); }) == ErrorCode::kFormatError);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  CHECK(code_of([&] { ModelStore::deserialize(bad_version); }) == ErrorCode::kFormatError);
  CHECK(code_of([&] { ModelStore::deserialize(bytes.substr(0, bytes.size() / 2)); }) == ErrorCode::kFormatError);
}

TEST_CASE("empty store serializes and lists no corpora") {
  ModelStore store;
  const auto loaded = ModelStore::deserialize(store.serialize());
  CHECK(loaded.corpus_ids().empty());
  CHECK_FALSE(loaded.has_corpus("x"));
  CHECK(code_of([&] { loaded.corpus("x"); }) == ErrorCode::kUnknownCorpus);
  CHECK(code_of([&] { loaded.slices("x"); }) == ErrorCode::kUnknownCorpus);
}

TEST_CASE("write_slice validates shapes against corpus parameters") {
  ModelStore store;
  CHECK(code_of([&] { store.write_slice("nope", testing::random_slice(0, 1900, 5, 4, 2, 1)); }) ==
        ErrorCode::kUnknownCorpus);
  store.put_corpus(testing::toy_info("c", 4, 2));
  CHECK(code_of([&] { store.write_slice("c", testing::random_slice(0, 1900, 5, 6, 2, 1)); }) ==
        ErrorCode::kConsistencyError);
  CHECK(code_of([&] { store.write_slice("c", testing::random_slice(0, 1900, 5, 4, 3, 1)); }) ==
        ErrorCode::kConsistencyError);

  auto short_lists = testing::random_slice(0, 1900, 5, 4, 2, 1);
  short_lists.top_similar.pop_back();
  CHECK(code_of([&] { store.write_slice("c", short_lists); }) == ErrorCode::kConsistencyError);

  auto bad_emotion = testing::random_slice(0, 1900, 5, 4, 2, 1);
  bad_emotion.emotions.push_back({99, {1, 1, 1}});
  CHECK(code_of([&] { store.write_slice("c", bad_emotion); }) == ErrorCode::kConsistencyError);

  auto bad_count = testing::random_slice(0, 1900, 5, 4, 2, 1);
  bad_count.slice.token_count = 1;
  CHECK(code_of([&] { store.write_slice("c", bad_count); }) == ErrorCode::kConsistencyError);

  auto nan_vad = testing::random_slice(0, 1900, 5, 4, 2, 1);
  nan_vad.emotions.front().score.valence = std::nan("");
  CHECK(code_of([&] { store.write_slice("c", nan_vad); }) == ErrorCode::kConsistencyError);

  store.write_slice("c", testing::random_slice(0, 1900, 5, 4, 2, 1));
  auto changed = testing::toy_info("c", 8, 2);
  CHECK(code_of([&] { store.put_corpus(changed); }) == ErrorCode::kConsistencyError);
}

TEST_CASE("rewriting a slice replaces it atomically") {
  ModelStore store;
  store.put_corpus(testing::toy_info("c", 4, 2));
  store.write_slice("c", testing::random_slice(0, 1900, 5, 4, 2, 1));
  const auto before = store.slices("c")[0];
  const auto receipt = store.write_slice("c", testing::random_slice(0, 1900, 7, 4, 2, 2));
  CHECK(before->vocab.size() == 5);
  CHECK(store.slices("c").size() == 1);
  CHECK(store.slices("c")[0]->vocab.size() == 7);
  CHECK(receipt.checksum == slice_checksum("c", *store.slices("c")[0]));
}

TEST_CASE("concurrent writers to distinct slices produce the sequential result") {
  constexpr int kSlices = 8;
  std::vector<SliceRecord> records;
  for (int s = 0; s < kSlices; ++s) records.push_back(testing::random_slice(s, 1800 + 10 * s, 30, 6, 4, 7 + s));

  ModelStore sequential;
  sequential.put_corpus(testing::toy_info("c", 6, 4));
  std::vector<std::uint64_t> expected;
  for (const auto& r : records) expected.push_back(sequential.write_slice("c", r).checksum);

  ModelStore concurrent;
  concurrent.put_corpus(testing::toy_info("c", 6, 4));
  std::vector<std::uint64_t> got(kSlices);
  {
    std::vector<std::jthread> threads;
    for (int s = 0; s < kSlices; ++s) {
      threads.emplace_back([&, s] {
        got[static_cast<std::size_t>(s)] = concurrent.write_slice("c", records[static_cast<std::size_t>(s)]).checksum;
        (void)concurrent.slices("c");
      });
    }
  }
  CHECK(got == expected);
  CHECK(concurrent.serialize() == sequential.serialize());
  const auto stored = concurrent.slices("c");
  for (std::size_t i = 0; i < stored.size(); ++i) CHECK(slice_checksum("c", *stored[i]) == expected[i]);
}

TEST_CASE("cached neighbor cosines agree with stored vectors") {
  const auto store = ModelStore::deserialize(toy_store(60, 10, 2).serialize());
  for (const auto& record : store.slices("toy")) {
    for (std::size_t w = 0; w < record->vocab.size(); ++w) {
      const auto& word = record->vocab.word(static_cast<WordId>(w));
      for (const auto& nb : record->top_similar[w]) {
        const auto series = store.similarity_on_the_fly("toy", word, record->vocab.word(nb.id));
        const auto it = std::find_if(series.points.begin(), series.points.end(),
                                     [&](const auto& p) { return p.slice_id == record->slice.slice_id; });
        REQUIRE(it != series.points.end());
        CHECK(std::abs(it->cosine - nb.cosine) <= 1e-6);
      }
    }
  }
}

TEST_CASE("similarity_on_the_fly skips slices missing a word and names unknown words") {
  ModelStore store;
  store.put_corpus(testing::toy_info("c", 4, 2));
  store.write_slice("c", testing::random_slice(0, 1900, 10, 4, 2, 1));
  store.write_slice("c", testing::random_slice(1, 1910, 5, 4, 2, 2));
  const auto series = store.similarity_on_the_fly("c", "w1", "w8");
  REQUIRE(series.points.size() == 1);
  CHECK(series.points[0].slice_id == 0);
  CHECK(store.similarity_on_the_fly("c", "w1", "w1").points[1].cosine == doctest::Approx(1.0));
  try {
    store.similarity_on_the_fly("c", "w1", "zzz");
    FAIL("expected UnknownWord");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownWord);
    CHECK(e.subject() == "zzz");
  }
}

TEST_CASE("get_reference_words takes the best cached cosine over slices") {
  const auto store = toy_store(50, 6, 3);
  const auto records = store.slices("toy");
  for (const std::string word : {"w0", "w7", "w33"}) {
    std::map<std::string, double> best;
    for (const auto& r : records) {
      const auto id = *r->vocab.id(word);
      for (const auto& nb : r->top_similar[static_cast<std::size_t>(id)]) {
        auto& slot = best.try_emplace(r->vocab.word(nb.id), -2.0).first->second;
        slot = std::max(slot, nb.cosine);
      }
    }
    std::vector<cooc::ScoredWord> oracle;
    for (const auto& [w, s] : best) oracle.push_back({w, s});
    std::sort(oracle.begin(), oracle.end(),
              [](const auto& a, const auto& b) { return a.score != b.score ? a.score > b.score : a.word < b.word; });
    for (int k : {1, 4, 100}) {
      auto expect = oracle;
      if (expect.size() > static_cast<std::size_t>(k)) expect.resize(static_cast<std::size_t>(k));
      CHECK(store.get_reference_words("toy", word, k) == expect);
    }
  }
  CHECK(code_of([&] { store.get_reference_words("toy", "zzz", 3); }) == ErrorCode::kUnknownWord);
  CHECK(code_of([&] { store.get_reference_words("toy", "w0", 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("vector storage is smaller than pairwise storage once |V| is large") {
  ModelStore small;
  small.put_corpus(testing::toy_info("s", 100, 2));
  small.write_slice("s", testing::random_slice(0, 1900, 20, 100, 2, 1));
  const auto tiny = small.footprint("s");
  CHECK(tiny.vector_bytes > tiny.pairwise_bytes);

  ModelStore large;
  large.put_corpus(testing::toy_info("l", 100, 2));
  large.write_slice("l", testing::random_slice(0, 1900, 1500, 100, 2, 1));
  const auto big = large.footprint("l");
  CHECK(big.vector_bytes < big.pairwise_bytes);
}

TEST_CASE("CSV export/import round-trips every table") {
  auto store = toy_store(12, 4, 2);
  CorpusInfo info = store.corpus("toy");
  info.lemmas = {{"hearts", "heart"}};
  store.put_corpus(info);
  const std::string before = store.serialize();
  for (Table t : all_tables()) {
    std::ostringstream csv;
    store.export_csv(t, csv);
    CHECK(csv.str().find('\n') != std::string::npos);
    std::istringstream in(csv.str());
    store.import_csv(t, in);
    CHECK(store.serialize() == before);
  }
}

TEST_CASE("CSV import that breaks consistency leaves the store unchanged") {
  auto store = toy_store(12, 4, 2);
  const std::string before = store.serialize();

  std::ostringstream vectors;
  store.export_csv(Table::kVectors, vectors);
  std::string text = vectors.str();
  text.erase(text.rfind('\n', text.size() - 2) + 1);  // drop last row
  std::istringstream truncated(text);
  CHECK(code_of([&] { store.import_csv(Table::kVectors, truncated); }) == ErrorCode::kConsistencyError);
  CHECK(store.serialize() == before);

  std::istringstream bad_header("nonsense\n");
  CHECK_THROWS_AS(store.import_csv(Table::kWords, bad_header), Error);
  CHECK(store.serialize() == before);

  std::istringstream orphan("corpus_id,slice_id,word_id,rank,other_id,cosine\nghost,0,0,1,1,0.5\n");
  CHECK_THROWS_AS(store.import_csv(Table::kTopSimilar, orphan), Error);
  CHECK(store.serialize() == before);
}

TEST_CASE("save writes atomically and load restores the store") {
  const auto dir = testing::temp_dir("store_save");
  const auto store = toy_store(20, 4, 2);
  const auto path = dir / "toy.jstore";
  store.save(path);
  CHECK_FALSE(std::filesystem::exists(dir / "toy.jstore.tmp"));
  CHECK(ModelStore::load(path).serialize() == store.serialize());
  CHECK(code_of([&] { ModelStore::load(dir / "missing.jstore"); }) == ErrorCode::kIoError);
  CHECK(code_of([&] { store.save(dir / "no" / "such" / "dir.jstore"); }) == ErrorCode::kIoError);
}

TEST_CASE("CorpusInfo normalizer applies stored lemmas") {
  CorpusInfo info = testing::toy_info("de", 4);
  info.language = corpus::Language::kGerman;
  info.lemmas = {{"herzens", "herz"}};
  CHECK(info.normalizer()("Herzens") == "herz");
  CorpusInfo en = testing::toy_info("en", 4);
  CHECK(en.normalizer()("Heart") == "heart");
}
