#pragma once

// Row-level view of the store shared by the binary codec and CSV import/export.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "jeseme/store.hpp"

namespace jeseme::store::detail {

using jeseme::detail::ByteReader;
using jeseme::detail::ByteWriter;
using jeseme::detail::fnv1a;

struct CorpusRow {
  std::string corpus_id;
  corpus::Language language = corpus::Language::kEnglish;
  CorpusParams params;
};

struct LemmaRow {
  std::string corpus_id;
  std::string surface;
  std::string lemma;
};

struct SliceRow {
  std::string corpus_id;
  corpus::TimeSlice slice;
};

struct WordRow {
  std::string corpus_id;
  int slice_id = 0;
  WordId word_id = 0;
  std::string word;
  std::int64_t count = 0;
};

struct VectorRow {
  std::string corpus_id;
  int slice_id = 0;
  WordId word_id = 0;
  std::vector<float> values;
};

struct EmotionTableRow {
  std::string corpus_id;
  int slice_id = 0;
  WordId word_id = 0;
  emotion::VadScore score;
};

// Shared by top_similar (other = neighbor, value = cosine) and contexts
// (other = context word, value = ppmi). Ranks start at 1.
struct RankedRow {
  std::string corpus_id;
  int slice_id = 0;
  WordId word_id = 0;
  int rank = 0;
  WordId other = 0;
  double value = 0.0;
};

struct Tables {
  std::vector<CorpusRow> corpora;
  std::vector<LemmaRow> lemmas;
  std::vector<SliceRow> slices;
  std::vector<WordRow> words;
  std::vector<VectorRow> vectors;
  std::vector<EmotionTableRow> emotions;
  std::vector<RankedRow> top_similar;
  std::vector<RankedRow> contexts;
};

struct CorpusEntry {
  CorpusInfo info;
  std::map<int, std::shared_ptr<const SliceRecord>> slices;
};

using CorpusMap = std::map<std::string, CorpusEntry, std::less<>>;

void validate_slice(const CorpusInfo& info, const SliceRecord& record);

// Rows of one slice appended to `tables` (slice, words, vectors, emotions,
// top_similar, contexts).
void flatten_slice(const std::string& corpus_id, const SliceRecord& record, Tables& tables);
Tables flatten(const CorpusMap& corpora);
// Rebuilds and validates every slice. Throws Error(kConsistencyError).
CorpusMap assemble(const Tables& tables);

// Binary row codecs.
void encode_row(ByteWriter& w, const CorpusRow& row);
void encode_row(ByteWriter& w, const LemmaRow& row);
void encode_row(ByteWriter& w, const SliceRow& row);
void encode_row(ByteWriter& w, const WordRow& row);
void encode_row(ByteWriter& w, const VectorRow& row);
void encode_row(ByteWriter& w, const EmotionTableRow& row);
void encode_row(ByteWriter& w, const RankedRow& row);

// CSV (RFC 4180 quoting) per table.
void write_csv(Table table, const Tables& tables, std::ostream& out);
void read_csv(Table table, std::istream& in, Tables& tables);

}  // namespace jeseme::store::detail
