#include "jeseme/store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "binary_io.hpp"
#include "jeseme/error.hpp"
#include "store_tables.hpp"

namespace jeseme::store {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr std::string_view kMagic = "JESEMEST";
constexpr std::uint32_t kFormatVersion = 1;

[[noreturn]] void inconsistent(const std::string& message) { throw Error(ErrorCode::kConsistencyError, message); }

std::string slice_label(const std::string& corpus_id, int slice_id) {
  return corpus_id + "/" + std::to_string(slice_id);
}

}  // namespace

corpus::Normalizer CorpusInfo::normalizer() const {
  if (language == corpus::Language::kGerman && !lemmas.empty()) {
    return corpus::Normalizer(language, corpus::LemmaTable::from_pairs(lemmas));
  }
  return corpus::Normalizer(language);
}

const emotion::VadScore* SliceRecord::emotion(WordId word) const {
  auto it = std::lower_bound(emotions.begin(), emotions.end(), word,
                             [](const EmotionRow& row, WordId w) { return row.word < w; });
  return it != emotions.end() && it->word == word ? &it->score : nullptr;
}

std::string_view to_string(Table table) {
  switch (table) {
    case Table::kCorpora: return "corpora";
    case Table::kLemmas: return "lemmas";
    case Table::kSlices: return "slices";
    case Table::kWords: return "words";
    case Table::kVectors: return "vectors";
    case Table::kEmotions: return "emotions";
    case Table::kTopSimilar: return "top_similar";
    case Table::kContexts: return "contexts";
  }
  return "?";
}

const std::vector<Table>& all_tables() {
  static const std::vector<Table> tables{Table::kCorpora, Table::kLemmas,   Table::kSlices,     Table::kWords,
                                         Table::kVectors, Table::kEmotions, Table::kTopSimilar, Table::kContexts};
  return tables;
}

Table parse_table(std::string_view name) {
  for (Table t : all_tables()) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown table '" + std::string(name) + "'");
}

namespace detail {

void validate_slice(const CorpusInfo& info, const SliceRecord& record) {
  const auto& p = info.params;
  const std::string where = slice_label(info.corpus_id, record.slice.slice_id);
  const std::size_t n = record.vocab.size();
  const auto& s = record.slice;
  if (s.start_year > s.end_year || s.label_year != s.start_year) inconsistent(where + ": bad slice years");
  if (n == 0) inconsistent(where + ": empty vocabulary");
  if (record.model.dimension() != static_cast<std::size_t>(p.dimension)) {
    inconsistent(where + ": vector length " + std::to_string(record.model.dimension()) + " != dimension " +
                 std::to_string(p.dimension));
  }
  if (record.model.size() != n) inconsistent(where + ": vector count differs from vocabulary size");
  std::int64_t counted = 0;
  for (auto c : record.vocab.counts()) counted += c;
  if (counted > s.token_count) inconsistent(where + ": word counts exceed slice token count");

  const auto valid_id = [n](WordId id) { return id >= 0 && static_cast<std::size_t>(id) < n; };
  for (std::size_t i = 0; i < record.emotions.size(); ++i) {
    const auto& row = record.emotions[i];
    if (!valid_id(row.word)) inconsistent(where + ": emotion row for unknown word id");
    if (i > 0 && record.emotions[i - 1].word >= row.word) inconsistent(where + ": emotion rows not ascending");
    for (std::size_t dim = 0; dim < emotion::kVadDimensions; ++dim) {
      if (!std::isfinite(row.score[dim])) inconsistent(where + ": non-finite emotion value");
    }
  }

  if (record.top_similar.size() != n) inconsistent(where + ": top_similar must have one list per word");
  for (std::size_t w = 0; w < n; ++w) {
    const auto& list = record.top_similar[w];
    if (list.size() > static_cast<std::size_t>(p.neighbors)) inconsistent(where + ": more than K cached neighbors");
    std::set<WordId> seen;
    for (const auto& nb : list) {
      if (!valid_id(nb.id) || nb.id == static_cast<WordId>(w) || !seen.insert(nb.id).second ||
          !std::isfinite(nb.cosine)) {
        inconsistent(where + ": invalid cached neighbor");
      }
    }
  }
  if (record.contexts.size() != n) inconsistent(where + ": contexts must have one list per word");
  for (const auto& list : record.contexts) {
    if (list.size() > static_cast<std::size_t>(p.contexts)) inconsistent(where + ": more than K_c cached contexts");
    std::set<WordId> seen;
    for (const auto& ctx : list) {
      if (!valid_id(ctx.context) || !seen.insert(ctx.context).second || !(ctx.ppmi > 0.0) ||
          !std::isfinite(ctx.ppmi)) {
        inconsistent(where + ": invalid cached context");
      }
    }
  }
}

void flatten_slice(const std::string& corpus_id, const SliceRecord& record, Tables& t) {
  const int sid = record.slice.slice_id;
  t.slices.push_back({corpus_id, record.slice});
  const std::size_t n = record.vocab.size();
  for (std::size_t w = 0; w < n; ++w) {
    const auto id = static_cast<WordId>(w);
    t.words.push_back({corpus_id, sid, id, record.vocab.word(id), record.vocab.count(id)});
  }
  for (std::size_t w = 0; w < n; ++w) {
    const auto v = record.model.vector(static_cast<WordId>(w));
    t.vectors.push_back({corpus_id, sid, static_cast<WordId>(w), std::vector<float>(v.begin(), v.end())});
  }
  for (const auto& row : record.emotions) t.emotions.push_back({corpus_id, sid, row.word, row.score});
  for (std::size_t w = 0; w < n; ++w) {
    int rank = 1;
    for (const auto& nb : record.top_similar[w]) {
      t.top_similar.push_back({corpus_id, sid, static_cast<WordId>(w), rank++, nb.id, nb.cosine});
    }
  }
  for (std::size_t w = 0; w < n; ++w) {
    int rank = 1;
    for (const auto& ctx : record.contexts[w]) {
      t.contexts.push_back({corpus_id, sid, static_cast<WordId>(w), rank++, ctx.context, ctx.ppmi});
    }
  }
}

Tables flatten(const CorpusMap& corpora) {
  Tables t;
  for (const auto& [id, entry] : corpora) {
    t.corpora.push_back({id, entry.info.language, entry.info.params});
    for (const auto& [surface, lemma] : entry.info.lemmas) t.lemmas.push_back({id, surface, lemma});
    for (const auto& [sid, record] : entry.slices) flatten_slice(id, *record, t);
  }
  return t;
}

namespace {

struct SliceBuilder {
  corpus::TimeSlice slice;
  std::vector<const WordRow*> words;
  std::vector<const VectorRow*> vectors;
  std::vector<const EmotionTableRow*> emotions;
  std::vector<const RankedRow*> top_similar;
  std::vector<const RankedRow*> contexts;
};

template <typename Row>
bool by_word_then_rank(const Row* a, const Row* b) {
  if (a->word_id != b->word_id) return a->word_id < b->word_id;
  if constexpr (std::is_same_v<Row, RankedRow>) return a->rank < b->rank;
  return false;
}

// Per-word ranked lists; ranks must run 1..m without gaps.
template <typename Entry, typename Make>
std::vector<std::vector<Entry>> ranked_lists(std::vector<const RankedRow*> rows, std::size_t n,
                                             const std::string& where, const char* what, Make make) {
  std::sort(rows.begin(), rows.end(), by_word_then_rank<RankedRow>);
  std::vector<std::vector<Entry>> lists(n);
  for (const RankedRow* row : rows) {
    if (row->word_id < 0 || static_cast<std::size_t>(row->word_id) >= n) {
      inconsistent(where + ": " + what + " row for unknown word id");
    }
    auto& list = lists[static_cast<std::size_t>(row->word_id)];
    if (row->rank != static_cast<int>(list.size()) + 1) inconsistent(where + ": " + what + " ranks not contiguous");
    list.push_back(make(*row));
  }
  return lists;
}

}  // namespace

CorpusMap assemble(const Tables& t) {
  CorpusMap corpora;
  for (const auto& row : t.corpora) {
    if (row.corpus_id.empty()) inconsistent("empty corpus id");
    CorpusEntry entry;
    entry.info = CorpusInfo{row.corpus_id, row.language, row.params, {}};
    if (!corpora.emplace(row.corpus_id, std::move(entry)).second) inconsistent("duplicate corpus " + row.corpus_id);
  }
  const auto corpus_of = [&](const std::string& id) -> CorpusEntry& {
    auto it = corpora.find(id);
    if (it == corpora.end()) inconsistent("row references unknown corpus '" + id + "'");
    return it->second;
  };
  for (const auto& row : t.lemmas) corpus_of(row.corpus_id).info.lemmas.emplace_back(row.surface, row.lemma);
  for (auto& [id, entry] : corpora) std::sort(entry.info.lemmas.begin(), entry.info.lemmas.end());

  std::map<std::pair<std::string, int>, SliceBuilder> builders;
  for (const auto& row : t.slices) {
    corpus_of(row.corpus_id);
    SliceBuilder b;
    b.slice = row.slice;
    if (!builders.emplace(std::make_pair(row.corpus_id, row.slice.slice_id), std::move(b)).second) {
      inconsistent("duplicate slice " + slice_label(row.corpus_id, row.slice.slice_id));
    }
  }
  const auto builder_of = [&](const std::string& id, int sid) -> SliceBuilder& {
    auto it = builders.find(std::make_pair(id, sid));
    if (it == builders.end()) inconsistent("row references unknown slice " + slice_label(id, sid));
    return it->second;
  };
  for (const auto& row : t.words) builder_of(row.corpus_id, row.slice_id).words.push_back(&row);
  for (const auto& row : t.vectors) builder_of(row.corpus_id, row.slice_id).vectors.push_back(&row);
  for (const auto& row : t.emotions) builder_of(row.corpus_id, row.slice_id).emotions.push_back(&row);
  for (const auto& row : t.top_similar) builder_of(row.corpus_id, row.slice_id).top_similar.push_back(&row);
  for (const auto& row : t.contexts) builder_of(row.corpus_id, row.slice_id).contexts.push_back(&row);

  for (auto& [key, b] : builders) {
    CorpusEntry& entry = corpora.find(key.first)->second;
    const auto& params = entry.info.params;
    const std::string where = slice_label(key.first, key.second);

    std::sort(b.words.begin(), b.words.end(), by_word_then_rank<WordRow>);
    std::vector<std::string> words;
    std::vector<std::int64_t> counts;
    for (std::size_t i = 0; i < b.words.size(); ++i) {
      if (b.words[i]->word_id != static_cast<WordId>(i)) inconsistent(where + ": word ids not contiguous");
      words.push_back(b.words[i]->word);
      counts.push_back(b.words[i]->count);
    }
    const std::size_t n = words.size();

    std::sort(b.vectors.begin(), b.vectors.end(), by_word_then_rank<VectorRow>);
    if (b.vectors.size() != n) inconsistent(where + ": vector rows do not match words");
    const auto d = static_cast<std::size_t>(params.dimension);
    std::vector<float> block;
    block.reserve(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      if (b.vectors[i]->word_id != static_cast<WordId>(i)) inconsistent(where + ": vector rows do not match words");
      if (b.vectors[i]->values.size() != d) inconsistent(where + ": vector block length differs from dimension");
      block.insert(block.end(), b.vectors[i]->values.begin(), b.vectors[i]->values.end());
    }

    SliceRecord record;
    record.slice = b.slice;
    record.vocab = corpus::Vocabulary::from_entries(std::move(words), std::move(counts), params.min_count);
    if (n == 0) inconsistent(where + ": empty vocabulary");
    record.model = embed::EmbeddingModel(b.slice.slice_id, d, std::move(block), {}, params.eig_weight, params.svd_seed);

    std::sort(b.emotions.begin(), b.emotions.end(), by_word_then_rank<EmotionTableRow>);
    for (const auto* row : b.emotions) record.emotions.push_back({row->word_id, row->score});
    record.top_similar = ranked_lists<embed::Neighbor>(b.top_similar, n, where, "top_similar",
                                                       [](const RankedRow& r) { return embed::Neighbor{r.other, r.value}; });
    record.contexts = ranked_lists<ContextEntry>(b.contexts, n, where, "contexts",
                                                 [](const RankedRow& r) { return ContextEntry{r.other, r.value}; });
    validate_slice(entry.info, record);
    entry.slices.emplace(key.second, std::make_shared<const SliceRecord>(std::move(record)));
  }
  return corpora;
}

void encode_row(ByteWriter& w, const CorpusRow& row) {
  w.str(row.corpus_id);
  w.str(corpus::to_string(row.language));
  const auto& p = row.params;
  w.i32(p.dimension);
  w.i32(p.window);
  w.i64(p.min_count);
  w.f64(p.alpha);
  w.f64(p.eig_weight);
  w.u64(p.svd_seed);
  w.i32(p.neighbors);
  w.i32(p.contexts);
  w.f64(p.min_seed_sim);
}

void encode_row(ByteWriter& w, const LemmaRow& row) {
  w.str(row.corpus_id);
  w.str(row.surface);
  w.str(row.lemma);
}

void encode_row(ByteWriter& w, const SliceRow& row) {
  w.str(row.corpus_id);
  w.i32(row.slice.slice_id);
  w.i32(row.slice.label_year);
  w.i32(row.slice.start_year);
  w.i32(row.slice.end_year);
  w.i64(row.slice.token_count);
}

void encode_row(ByteWriter& w, const WordRow& row) {
  w.str(row.corpus_id);
  w.i32(row.slice_id);
  w.i32(row.word_id);
  w.str(row.word);
  w.i64(row.count);
}

void encode_row(ByteWriter& w, const VectorRow& row) {
  w.str(row.corpus_id);
  w.i32(row.slice_id);
  w.i32(row.word_id);
  for (float x : row.values) w.f32(x);
}

void encode_row(ByteWriter& w, const EmotionTableRow& row) {
  w.str(row.corpus_id);
  w.i32(row.slice_id);
  w.i32(row.word_id);
  w.f64(row.score.valence);
  w.f64(row.score.arousal);
  w.f64(row.score.dominance);
}

void encode_row(ByteWriter& w, const RankedRow& row) {
  w.str(row.corpus_id);
  w.i32(row.slice_id);
  w.i32(row.word_id);
  w.i32(row.rank);
  w.i32(row.other);
  w.f64(row.value);
}

}  // namespace detail

namespace {

using namespace detail;

template <typename Row>
std::string encode_table(const std::vector<Row>& rows) {
  ByteWriter w;
  for (const auto& row : rows) encode_row(w, row);
  return w.take();
}

ByteWriter encode_slice(const std::string& corpus_id, const SliceRecord& record) {
  Tables rows;
  flatten_slice(corpus_id, record, rows);
  ByteWriter w;
  for (const auto& r : rows.slices) encode_row(w, r);
  for (const auto& r : rows.words) encode_row(w, r);
  for (const auto& r : rows.vectors) encode_row(w, r);
  for (const auto& r : rows.emotions) encode_row(w, r);
  for (const auto& r : rows.top_similar) encode_row(w, r);
  for (const auto& r : rows.contexts) encode_row(w, r);
  return w;
}

struct TableBlob {
  std::string_view bytes;
  std::uint64_t rows = 0;
};

Tables decode_tables(const std::map<std::string, TableBlob, std::less<>>& blobs) {
  const auto blob = [&](Table table) -> const TableBlob& {
    auto it = blobs.find(to_string(table));
    if (it == blobs.end()) throw Error(ErrorCode::kFormatError, "store lacks table " + std::string(to_string(table)));
    return it->second;
  };
  const auto each_row = [&](Table table, auto&& decode_one) {
    const auto& b = blob(table);
    ByteReader r(b.bytes);
    for (std::uint64_t i = 0; i < b.rows; ++i) decode_one(r);
    if (!r.done()) throw Error(ErrorCode::kFormatError, "trailing bytes in table " + std::string(to_string(table)));
  };

  Tables t;
  std::unordered_map<std::string, std::size_t> dims;
  each_row(Table::kCorpora, [&](ByteReader& r) {
    CorpusRow row;
    row.corpus_id = r.str();
    row.language = corpus::parse_language(r.str());
    auto& p = row.params;
    p.dimension = r.i32();
    p.window = r.i32();
    p.min_count = r.i64();
    p.alpha = r.f64();
    p.eig_weight = r.f64();
    p.svd_seed = r.u64();
    p.neighbors = r.i32();
    p.contexts = r.i32();
    p.min_seed_sim = r.f64();
    if (p.dimension < 1) throw Error(ErrorCode::kFormatError, "non-positive dimension");
    dims[row.corpus_id] = static_cast<std::size_t>(p.dimension);
    t.corpora.push_back(std::move(row));
  });
  each_row(Table::kLemmas, [&](ByteReader& r) {
    LemmaRow row;
    row.corpus_id = r.str();
    row.surface = r.str();
    row.lemma = r.str();
    t.lemmas.push_back(std::move(row));
  });
  each_row(Table::kSlices, [&](ByteReader& r) {
    SliceRow row;
    row.corpus_id = r.str();
    row.slice.slice_id = r.i32();
    row.slice.label_year = r.i32();
    row.slice.start_year = r.i32();
    row.slice.end_year = r.i32();
    row.slice.token_count = r.i64();
    t.slices.push_back(std::move(row));
  });
  each_row(Table::kWords, [&](ByteReader& r) {
    WordRow row;
    row.corpus_id = r.str();
    row.slice_id = r.i32();
    row.word_id = r.i32();
    row.word = r.str();
    row.count = r.i64();
    t.words.push_back(std::move(row));
  });
  each_row(Table::kVectors, [&](ByteReader& r) {
    VectorRow row;
    row.corpus_id = r.str();
    row.slice_id = r.i32();
    row.word_id = r.i32();
    auto it = dims.find(row.corpus_id);
    if (it == dims.end()) throw Error(ErrorCode::kFormatError, "vector row for unknown corpus " + row.corpus_id);
    row.values.resize(it->second);
    for (float& x : row.values) x = r.f32();
    t.vectors.push_back(std::move(row));
  });
  each_row(Table::kEmotions, [&](ByteReader& r) {
    EmotionTableRow row;
    row.corpus_id = r.str();
    row.slice_id = r.i32();
    row.word_id = r.i32();
    row.score.valence = r.f64();
    row.score.arousal = r.f64();
    row.score.dominance = r.f64();
    t.emotions.push_back(std::move(row));
  });
  const auto ranked = [](ByteReader& r) {
    RankedRow row;
    row.corpus_id = r.str();
    row.slice_id = r.i32();
    row.word_id = r.i32();
    row.rank = r.i32();
    row.other = r.i32();
    row.value = r.f64();
    return row;
  };
  each_row(Table::kTopSimilar, [&](ByteReader& r) { t.top_similar.push_back(ranked(r)); });
  each_row(Table::kContexts, [&](ByteReader& r) { t.contexts.push_back(ranked(r)); });
  return t;
}

}  // namespace

struct ModelStore::State {
  mutable std::shared_mutex mutex;
  CorpusMap corpora;
};

ModelStore::ModelStore() : state_(std::make_unique<State>()) {}
ModelStore::~ModelStore() = default;
ModelStore::ModelStore(ModelStore&&) noexcept = default;
ModelStore& ModelStore::operator=(ModelStore&&) noexcept = default;

void ModelStore::put_corpus(CorpusInfo info) {
  if (info.corpus_id.empty()) throw Error(ErrorCode::kInvalidArgument, "corpus_id must be non-empty");
  if (info.params.dimension < 1 || info.params.neighbors < 0 || info.params.contexts < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid corpus parameters");
  }
  std::sort(info.lemmas.begin(), info.lemmas.end());
  std::unique_lock lock(state_->mutex);
  auto it = state_->corpora.find(info.corpus_id);
  if (it == state_->corpora.end()) {
    const std::string id = info.corpus_id;
    state_->corpora.emplace(id, CorpusEntry{std::move(info), {}});
    return;
  }
  if (!it->second.slices.empty() && it->second.info.params != info.params) {
    throw Error(ErrorCode::kConsistencyError, "cannot change parameters of a corpus that already has slices",
                info.corpus_id);
  }
  it->second.info = std::move(info);
}

WriteReceipt ModelStore::write_slice(const std::string& corpus_id, SliceRecord record) {
  CorpusInfo info;
  {
    std::shared_lock lock(state_->mutex);
    auto it = state_->corpora.find(corpus_id);
    if (it == state_->corpora.end()) throw Error(ErrorCode::kUnknownCorpus, "unknown corpus " + corpus_id, corpus_id);
    info = it->second.info;
  }
  validate_slice(info, record);

  WriteReceipt receipt;
  receipt.corpus_id = corpus_id;
  receipt.slice_id = record.slice.slice_id;
  const ByteWriter encoded = encode_slice(corpus_id, record);
  receipt.checksum = fnv1a(encoded.buffer());
  receipt.bytes = encoded.size();
  auto shared = std::make_shared<const SliceRecord>(std::move(record));

  std::unique_lock lock(state_->mutex);
  auto it = state_->corpora.find(corpus_id);
  if (it == state_->corpora.end()) throw Error(ErrorCode::kUnknownCorpus, "unknown corpus " + corpus_id, corpus_id);
  if (it->second.info.params != info.params) {
    throw Error(ErrorCode::kConsistencyError, "corpus parameters changed during write", corpus_id);
  }
  it->second.slices[receipt.slice_id] = std::move(shared);
  return receipt;
}

std::uint64_t slice_checksum(const std::string& corpus_id, const SliceRecord& record) {
  return fnv1a(encode_slice(corpus_id, record).buffer());
}

std::vector<std::string> ModelStore::corpus_ids() const {
  std::shared_lock lock(state_->mutex);
  std::vector<std::string> ids;
  for (const auto& [id, entry] : state_->corpora) ids.push_back(id);
  return ids;
}

bool ModelStore::has_corpus(std::string_view corpus_id) const {
  std::shared_lock lock(state_->mutex);
  return state_->corpora.find(corpus_id) != state_->corpora.end();
}

CorpusInfo ModelStore::corpus(std::string_view corpus_id) const {
  std::shared_lock lock(state_->mutex);
  auto it = state_->corpora.find(corpus_id);
  if (it == state_->corpora.end()) {
    throw Error(ErrorCode::kUnknownCorpus, "unknown corpus " + std::string(corpus_id), std::string(corpus_id));
  }
  return it->second.info;
}

std::vector<std::shared_ptr<const SliceRecord>> ModelStore::slices(std::string_view corpus_id) const {
  std::vector<std::shared_ptr<const SliceRecord>> out;
  {
    std::shared_lock lock(state_->mutex);
    auto it = state_->corpora.find(corpus_id);
    if (it == state_->corpora.end()) {
      throw Error(ErrorCode::kUnknownCorpus, "unknown corpus " + std::string(corpus_id), std::string(corpus_id));
    }
    for (const auto& [sid, record] : it->second.slices) out.push_back(record);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a->slice.start_year < b->slice.start_year;
  });
  return out;
}

embed::SimilaritySeries ModelStore::similarity_on_the_fly(std::string_view corpus_id, std::string_view word1,
                                                          std::string_view word2) const {
  const auto records = slices(corpus_id);
  embed::SimilaritySeries series;
  series.word_pair = {std::string(word1), std::string(word2)};
  bool seen1 = false;
  bool seen2 = false;
  for (const auto& record : records) {
    const auto a = record->vocab.id(word1);
    const auto b = record->vocab.id(word2);
    seen1 = seen1 || a.has_value();
    seen2 = seen2 || b.has_value();
    if (a && b) series.points.push_back({record->slice.slice_id, embed::word_cosine(record->model, *a, *b)});
  }
  if (!seen1) throw Error(ErrorCode::kUnknownWord, "'" + std::string(word1) + "' not in corpus", std::string(word1));
  if (!seen2) throw Error(ErrorCode::kUnknownWord, "'" + std::string(word2) + "' not in corpus", std::string(word2));
  return series;
}

std::vector<cooc::ScoredWord> ModelStore::get_reference_words(std::string_view corpus_id, std::string_view word,
                                                              int k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto records = slices(corpus_id);
  std::map<std::string, double> best;
  bool seen = false;
  for (const auto& record : records) {
    const auto id = record->vocab.id(word);
    if (!id) continue;
    seen = true;
    for (const auto& nb : record->top_similar[static_cast<std::size_t>(*id)]) {
      const std::string& other = record->vocab.word(nb.id);
      auto [it, inserted] = best.emplace(other, nb.cosine);
      if (!inserted) it->second = std::max(it->second, nb.cosine);
    }
  }
  if (!seen) throw Error(ErrorCode::kUnknownWord, "'" + std::string(word) + "' not in corpus", std::string(word));
  std::vector<cooc::ScoredWord> ranked;
  for (const auto& [w, score] : best) ranked.push_back({w, score});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const cooc::ScoredWord& a, const cooc::ScoredWord& b) { return a.score > b.score; });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

StorageFootprint ModelStore::footprint(std::string_view corpus_id) const {
  const auto records = slices(corpus_id);
  const std::string id(corpus_id);
  StorageFootprint out;
  ByteWriter vectors(true);
  ByteWriter pairwise(true);
  for (const auto& record : records) {
    const int sid = record->slice.slice_id;
    const std::size_t n = record->vocab.size();
    for (std::size_t w = 0; w < n; ++w) {
      const auto v = record->model.vector(static_cast<WordId>(w));
      encode_row(vectors, VectorRow{id, sid, static_cast<WordId>(w), std::vector<float>(v.begin(), v.end())});
    }
    // Legacy scheme: one (word, other, cosine) row per unordered pair.
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const auto wa = static_cast<WordId>(a);
        const auto wb = static_cast<WordId>(b);
        pairwise.str(id);
        pairwise.i32(sid);
        pairwise.i32(wa);
        pairwise.i32(wb);
        pairwise.f64(embed::word_cosine(record->model, wa, wb));
      }
    }
  }
  out.vector_bytes = vectors.size();
  out.pairwise_bytes = pairwise.size();
  return out;
}

std::string ModelStore::serialize() const {
  Tables t;
  {
    std::shared_lock lock(state_->mutex);
    t = flatten(state_->corpora);
  }
  std::vector<std::pair<Table, std::pair<std::string, std::uint64_t>>> payloads;
  payloads.push_back({Table::kCorpora, {encode_table(t.corpora), t.corpora.size()}});
  payloads.push_back({Table::kLemmas, {encode_table(t.lemmas), t.lemmas.size()}});
  payloads.push_back({Table::kSlices, {encode_table(t.slices), t.slices.size()}});
  payloads.push_back({Table::kWords, {encode_table(t.words), t.words.size()}});
  payloads.push_back({Table::kVectors, {encode_table(t.vectors), t.vectors.size()}});
  payloads.push_back({Table::kEmotions, {encode_table(t.emotions), t.emotions.size()}});
  payloads.push_back({Table::kTopSimilar, {encode_table(t.top_similar), t.top_similar.size()}});
  payloads.push_back({Table::kContexts, {encode_table(t.contexts), t.contexts.size()}});

  std::uint64_t header_size = kMagic.size() + 4 + 4;
  for (const auto& [table, payload] : payloads) header_size += 2 + to_string(table).size() + 8 + 8 + 8;

  ByteWriter w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(payloads.size()));
  std::uint64_t offset = header_size;
  for (const auto& [table, payload] : payloads) {
    const auto name = to_string(table);
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name.data(), name.size());
    w.u64(offset);
    w.u64(payload.first.size());
    w.u64(payload.second);
    offset += payload.first.size();
  }
  for (const auto& [table, payload] : payloads) w.raw(payload.first.data(), payload.first.size());
  return w.take();
}

ModelStore ModelStore::deserialize(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kFormatError, "not a jeseme store (bad magic)");
  }
  ByteReader r(bytes.substr(kMagic.size()));
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported store version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::map<std::string, TableBlob, std::less<>> blobs;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    const std::string name(r.bytes(len));
    const std::uint64_t offset = r.u64();
    const std::uint64_t length = r.u64();
    const std::uint64_t rows = r.u64();
    if (offset > bytes.size() || length > bytes.size() - offset) {
      throw Error(ErrorCode::kFormatError, "table " + name + " lies outside the file");
    }
    blobs[name] = TableBlob{bytes.substr(offset, length), rows};
  }
  ModelStore store;
  store.state_->corpora = assemble(decode_tables(blobs));
  return store;
}

void ModelStore::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string(), tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string(), tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot move store into place: " + ec.message(), path.string());
}

ModelStore ModelStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open store " + path.string(), path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

void ModelStore::export_csv(Table table, std::ostream& out) const {
  Tables t;
  {
    std::shared_lock lock(state_->mutex);
    t = flatten(state_->corpora);
  }
  write_csv(table, t, out);
}

void ModelStore::import_csv(Table table, std::istream& in) {
  std::unique_lock lock(state_->mutex);
  Tables t = flatten(state_->corpora);
  read_csv(table, in, t);
  state_->corpora = assemble(t);
}

}  // namespace jeseme::store
