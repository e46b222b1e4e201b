#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jeseme/cooc.hpp"
#include "jeseme/corpus.hpp"
#include "jeseme/embed.hpp"
#include "jeseme/emotion.hpp"

namespace jeseme::store {

// Hyperparameters a corpus was built with. `dimension` fixes the length of
// every stored vector; `neighbors` / `contexts` bound the cached lists.
struct CorpusParams {
  int dimension = 300;
  int window = 4;
  std::int64_t min_count = 10;
  double alpha = 0.75;
  double eig_weight = 0.0;
  std::uint64_t svd_seed = 1;
  int neighbors = 10;
  int contexts = 20;
  double min_seed_sim = 0.0;

  friend bool operator==(const CorpusParams&, const CorpusParams&) = default;
};

struct CorpusInfo {
  std::string corpus_id;
  corpus::Language language = corpus::Language::kEnglish;
  CorpusParams params;
  // German only; used to normalize query words the same way as the corpus.
  std::vector<std::pair<std::string, std::string>> lemmas;

  corpus::Normalizer normalizer() const;
  friend bool operator==(const CorpusInfo&, const CorpusInfo&) = default;
};

struct EmotionRow {
  WordId word = 0;
  emotion::VadScore score;

  friend bool operator==(const EmotionRow&, const EmotionRow&) = default;
};

struct ContextEntry {
  WordId context = 0;
  double ppmi = 0.0;

  friend bool operator==(const ContextEntry&, const ContextEntry&) = default;
};

// Everything stored for one time slice. Per-word lists are indexed by word
// id and hold entries in rank order.
struct SliceRecord {
  corpus::TimeSlice slice;
  corpus::Vocabulary vocab;
  embed::EmbeddingModel model;
  std::vector<EmotionRow> emotions;  // ascending word id; induction failures omitted
  std::vector<std::vector<embed::Neighbor>> top_similar;
  std::vector<std::vector<ContextEntry>> contexts;

  const emotion::VadScore* emotion(WordId word) const;
};

struct WriteReceipt {
  std::string corpus_id;
  int slice_id = 0;
  std::uint64_t checksum = 0;
  std::uint64_t bytes = 0;
};

// FNV-1a over the slice's canonical row encoding.
std::uint64_t slice_checksum(const std::string& corpus_id, const SliceRecord& record);

enum class Table { kCorpora, kLemmas, kSlices, kWords, kVectors, kEmotions, kTopSimilar, kContexts };

std::string_view to_string(Table table);
// Throws Error(kInvalidArgument) for unknown names.
Table parse_table(std::string_view name);
const std::vector<Table>& all_tables();

struct StorageFootprint {
  std::uint64_t vector_bytes = 0;    // vectors table as serialized
  std::uint64_t pairwise_bytes = 0;  // every unordered word pair with its cosine, same row codec
};

// Embedded single-file store of the logical tables corpora, lemmas, slices,
// words, vectors, emotions, top_similar and contexts.
//
// Writers commit whole slices atomically; readers always observe either the
// previous or the new version of a slice. Thread-safe for concurrent readers
// and writers.
class ModelStore {
 public:
  ModelStore();
  ~ModelStore();
  ModelStore(ModelStore&&) noexcept;
  ModelStore& operator=(ModelStore&&) noexcept;
  ModelStore(const ModelStore&) = delete;
  ModelStore& operator=(const ModelStore&) = delete;

  // Registers or replaces corpus metadata. Changing the dimension of a
  // corpus that already has slices is a ConsistencyError.
  void put_corpus(CorpusInfo info);

  // Validates shapes against the corpus parameters, then replaces the slice
  // with the same slice_id. Throws Error(kConsistencyError) or
  // Error(kUnknownCorpus).
  WriteReceipt write_slice(const std::string& corpus_id, SliceRecord record);

  std::vector<std::string> corpus_ids() const;  // sorted
  bool has_corpus(std::string_view corpus_id) const;
  // Throws Error(kUnknownCorpus).
  CorpusInfo corpus(std::string_view corpus_id) const;
  // Ordered by start year. Throws Error(kUnknownCorpus).
  std::vector<std::shared_ptr<const SliceRecord>> slices(std::string_view corpus_id) const;

  // Cosine of stored vectors for every slice holding both words. Throws
  // Error(kUnknownWord) naming the first word absent from every slice.
  embed::SimilaritySeries similarity_on_the_fly(std::string_view corpus_id, std::string_view word1,
                                                std::string_view word2) const;

  // Union of cached neighbors over slices ranked by their best cached
  // cosine, ties lexicographic, truncated to k.
  std::vector<cooc::ScoredWord> get_reference_words(std::string_view corpus_id, std::string_view word,
                                                    int k) const;

  StorageFootprint footprint(std::string_view corpus_id) const;

  std::string serialize() const;
  static ModelStore deserialize(std::string_view bytes);
  // Writes to a temporary sibling file and renames it into place.
  void save(const std::filesystem::path& path) const;
  static ModelStore load(const std::filesystem::path& path);

  void export_csv(Table table, std::ostream& out) const;
  // Replaces one table with the CSV rows and revalidates the whole store;
  // on error the store is unchanged.
  void import_csv(Table table, std::istream& in);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace jeseme::store
