#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace jeseme {

using WordId = std::int32_t;

namespace corpus {

enum class Language { kEnglish, kGerman };

std::string_view to_string(Language language);
// Accepts "english" / "german"; throws Error(kInvalidManifest) otherwise.
Language parse_language(std::string_view name);

// Unicode-aware lowercasing of a UTF-8 string. Invalid byte sequences are
// copied through unchanged.
std::string to_lower_utf8(std::string_view text);

// Surface form -> lemma lookup for historical German spelling. Keys and
// values are lowercased on construction and lemma chains are collapsed, so
// lookup(lookup(x)) == lookup(x) for every x.
class LemmaTable {
 public:
  LemmaTable() = default;

  static LemmaTable from_pairs(std::vector<std::pair<std::string, std::string>> pairs);
  // Two-column TSV, no header: surface<TAB>lemma.
  static LemmaTable load_tsv(const std::filesystem::path& path);

  // Lemma for `surface`, or nullptr when the table has no entry.
  const std::string* find(std::string_view surface) const;

  std::size_t size() const { return lemmas_.size(); }
  bool empty() const { return lemmas_.empty(); }
  // Entries sorted by surface form.
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  std::unordered_map<std::string, std::string> lemmas_;
};

// English: lowercase only. German: lowercase, then lemma lookup (identity for
// forms the table does not know). `lemmas` must be null for English.
std::string normalize_token(std::string_view raw, Language language,
                            const LemmaTable* lemmas = nullptr);

// Language routing bundled with an optional lemma table.
class Normalizer {
 public:
  explicit Normalizer(Language language, std::optional<LemmaTable> lemmas = std::nullopt);

  std::string operator()(std::string_view raw) const;

  Language language() const { return language_; }
  const LemmaTable* lemmas() const { return lemmas_ ? &*lemmas_ : nullptr; }

 private:
  Language language_;
  std::optional<LemmaTable> lemmas_;
};

inline constexpr std::string_view kDefaultStripPattern = "[[:punct:]]+";

// Replaces every match of the strip pattern with a space, then splits on
// whitespace.
class Tokenizer {
 public:
  explicit Tokenizer(std::string strip_pattern = std::string(kDefaultStripPattern));

  std::vector<std::string> tokenize(std::string_view text) const;
  const std::string& pattern() const { return pattern_; }

 private:
  std::string pattern_;
  bool fast_path_;
  std::regex regex_;
};

enum class SlicingMode { kFixedSpan, kBalanced };

struct SlicingConfig {
  SlicingMode mode = SlicingMode::kFixedSpan;
  int span_years = 10;
  int target_slices = 4;
  int min_span_years = 10;
  int max_span_years = 50;
};

struct DocumentRef {
  int year = 0;
  std::filesystem::path path;
};

struct CorpusManifest {
  std::string corpus_id;
  Language language = Language::kEnglish;
  std::vector<DocumentRef> documents;
  SlicingConfig slicing;
  std::optional<std::filesystem::path> lemma_table_path;

  // Throws Error(kInvalidManifest). An empty document list is legal here and
  // reported as kEmptyCorpus by the slicing stage.
  void validate() const;

  // Document paths are resolved against `base_dir`.
  static CorpusManifest from_json_text(std::string_view text,
                                       const std::filesystem::path& base_dir);
  static CorpusManifest load(const std::filesystem::path& path);
};

struct TimeSlice {
  int slice_id = 0;
  int label_year = 0;
  int start_year = 0;
  int end_year = 0;
  std::int64_t token_count = 0;

  bool contains(int year) const { return year >= start_year && year <= end_year; }
  int span() const { return end_year - start_year + 1; }
  friend bool operator==(const TimeSlice&, const TimeSlice&) = default;
};

struct DocumentMass {
  int year = 0;
  std::int64_t tokens = 0;
};

// Partitions [min year, max year] into contiguous, ordered slices. Every
// slice except possibly the last spans [min_span_years, max_span_years]; the
// last one is clipped at the final document year.
std::vector<TimeSlice> build_slices(std::span<const DocumentMass> documents,
                                    const SlicingConfig& config);

struct Document {
  int year = 0;
  std::vector<std::string> tokens;  // normalized
};

struct Corpus {
  CorpusManifest manifest;
  Normalizer normalizer;
  std::vector<Document> documents;
};

// Reads, tokenizes and normalizes every document of the manifest.
Corpus load_corpus(const CorpusManifest& manifest, const Tokenizer& tokenizer);

std::vector<TimeSlice> build_slices(const Corpus& corpus);

// Indices into corpus.documents for each slice.
std::vector<std::vector<std::size_t>> assign_documents(const Corpus& corpus,
                                                       std::span<const TimeSlice> slices);

class Vocabulary {
 public:
  Vocabulary() = default;

  // `words` must already be in id order with counts >= min_count.
  static Vocabulary from_entries(std::vector<std::string> words, std::vector<std::int64_t> counts,
                                 std::int64_t min_count);

  std::size_t size() const { return words_.size(); }
  std::optional<WordId> id(std::string_view word) const;
  bool contains(std::string_view word) const { return id(word).has_value(); }
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::int64_t count(WordId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  std::int64_t min_count() const { return min_count_; }

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, WordId> ids_;
  std::int64_t min_count_ = 1;
};

// Words with count >= min_count; ids by descending count, ties broken
// lexicographically. Throws Error(kEmptyVocabulary).
Vocabulary build_vocabulary(std::span<const std::string> tokens, std::int64_t min_count);
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            std::int64_t min_count);

// Token ids per document; out-of-vocabulary tokens become -1 so that they
// still occupy a window position.
std::vector<std::vector<WordId>> encode_documents(
    std::span<const std::vector<std::string>> documents, const Vocabulary& vocab);

}  // namespace corpus
}  // namespace jeseme
