#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jeseme/corpus.hpp"
#include "jeseme/embed.hpp"

namespace jeseme::emotion {

// Valence, Arousal, Dominance on the seed lexicon's native [1, 9] scale.
struct VadScore {
  double valence = 0.0;
  double arousal = 0.0;
  double dominance = 0.0;

  double operator[](std::size_t dim) const { return dim == 0 ? valence : dim == 1 ? arousal : dominance; }
  double& operator[](std::size_t dim) { return dim == 0 ? valence : dim == 1 ? arousal : dominance; }
  friend bool operator==(const VadScore&, const VadScore&) = default;
};

inline constexpr std::size_t kVadDimensions = 3;

class SeedLexicon {
 public:
  static constexpr double kScaleMin = 1.0;
  static constexpr double kScaleMax = 9.0;

  // Throws Error(kInvalidArgument) for an empty lexicon or scores outside
  // [kScaleMin, kScaleMax].
  SeedLexicon(corpus::Language language, std::map<std::string, VadScore> entries);

  // CSV with header `word,valence,arousal,dominance`. Seed words are passed
  // through `normalizer` when given; the first of several rows that
  // normalize to the same word wins.
  static SeedLexicon parse_csv(std::string_view text, corpus::Language language,
                               const corpus::Normalizer* normalizer = nullptr);
  static SeedLexicon load_csv(const std::filesystem::path& path, corpus::Language language,
                              const corpus::Normalizer* normalizer = nullptr);

  corpus::Language language() const { return language_; }
  const std::map<std::string, VadScore>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const VadScore* find(std::string_view word) const;

 private:
  corpus::Language language_;
  std::map<std::string, VadScore> entries_;
};

// Seeds of a lexicon that are present in one slice's vocabulary.
class SeedIndex {
 public:
  SeedIndex(const SeedLexicon& seeds, const corpus::Vocabulary& vocab);

  const std::vector<WordId>& ids() const { return ids_; }
  const std::vector<VadScore>& scores() const { return scores_; }

 private:
  std::vector<WordId> ids_;
  std::vector<VadScore> scores_;
};

// Similarity-weighted mean of seed ratings over S' = {s in seeds : s != w,
// cos(w, s) > min_seed_sim}. nullopt when S' is empty.
std::optional<VadScore> try_induce(WordId word, const embed::EmbeddingModel& model, const SeedIndex& seeds,
                                   double min_seed_sim);

// Throws Error(kUnknownWord) or Error(kNoUsableSeeds).
VadScore induce_emotion(std::string_view word, const corpus::Vocabulary& vocab,
                        const embed::EmbeddingModel& model, const SeedLexicon& seeds, double min_seed_sim);

struct SliceEmbedding {
  int slice_id = 0;
  const corpus::Vocabulary* vocab = nullptr;
  const embed::EmbeddingModel* model = nullptr;
};

using InducedLexicon = std::map<std::pair<int, std::string>, VadScore>;
using OmissionHandler = std::function<void(int slice_id, const std::string& word, std::string_view reason)>;

// induce_emotion for every (slice, target). Failures are omitted and
// reported through `on_omission`.
InducedLexicon induce_lexicon(std::span<const SliceEmbedding> slices, const SeedLexicon& seeds,
                              std::span<const std::string> targets, double min_seed_sim,
                              const OmissionHandler& on_omission = {});

// (x - mean) / population std; all zeros when the std is 0.
std::vector<double> zscale_series(std::span<const double> values);

struct EmotionPoint {
  int slice_id = 0;
  VadScore score;
};

struct EmotionSeries {
  std::string word;
  std::vector<EmotionPoint> points;
  std::vector<EmotionPoint> display_points;  // z-scaled per dimension

  static EmotionSeries from_points(std::string word, std::vector<EmotionPoint> points);
};

// CSV `word,slice,valence,arousal,dominance`, rows in (word, slice) order.
void write_induced_csv(std::ostream& out, const InducedLexicon& lexicon);

}  // namespace jeseme::emotion
