#include "jeseme/emotion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "jeseme/error.hpp"
#include "text_format.hpp"

namespace jeseme::emotion {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_rating(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kFormatError,
                "seed lexicon line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

SeedLexicon::SeedLexicon(corpus::Language language, std::map<std::string, VadScore> entries)
    : language_(language), entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::kInvalidArgument, "seed lexicon is empty");
  for (const auto& [word, score] : entries_) {
    for (std::size_t dim = 0; dim < kVadDimensions; ++dim) {
      if (!(score[dim] >= kScaleMin && score[dim] <= kScaleMax)) {
        throw Error(ErrorCode::kInvalidArgument, "seed '" + word + "' rating outside [1, 9]", word);
      }
    }
  }
}

SeedLexicon SeedLexicon::parse_csv(std::string_view text, corpus::Language language,
                                   const corpus::Normalizer* normalizer) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::string, VadScore> entries;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto fields = split_csv_line(trimmed);
    if (!header_seen) {
      if (fields.size() != 4 || trim(fields[0]) != "word" || trim(fields[1]) != "valence" ||
          trim(fields[2]) != "arousal" || trim(fields[3]) != "dominance") {
        throw Error(ErrorCode::kFormatError, "seed lexicon header must be 'word,valence,arousal,dominance'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) {
      throw Error(ErrorCode::kFormatError, "seed lexicon line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const auto raw = trim(fields[0]);
    if (raw.empty()) continue;
    std::string word = normalizer != nullptr ? (*normalizer)(raw) : std::string(raw);
    VadScore score{parse_rating(fields[1], line_no), parse_rating(fields[2], line_no),
                   parse_rating(fields[3], line_no)};
    entries.emplace(std::move(word), score);
  }
  return SeedLexicon(language, std::move(entries));
}

SeedLexicon SeedLexicon::load_csv(const std::filesystem::path& path, corpus::Language language,
                                  const corpus::Normalizer* normalizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string(), path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), language, normalizer);
}

const VadScore* SeedLexicon::find(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  return it == entries_.end() ? nullptr : &it->second;
}

SeedIndex::SeedIndex(const SeedLexicon& seeds, const corpus::Vocabulary& vocab) {
  for (const auto& [word, score] : seeds.entries()) {
    if (const auto id = vocab.id(word)) {
      ids_.push_back(*id);
      scores_.push_back(score);
    }
  }
}

std::optional<VadScore> try_induce(WordId word, const embed::EmbeddingModel& model, const SeedIndex& seeds,
                                   double min_seed_sim) {
  double weight_sum = 0.0;
  VadScore weighted;
  VadScore lo{kInf, kInf, kInf};
  VadScore hi{-kInf, -kInf, -kInf};
  for (std::size_t i = 0; i < seeds.ids().size(); ++i) {
    const WordId seed = seeds.ids()[i];
    if (seed == word) continue;
    const double sim = embed::word_cosine(model, word, seed);
    if (!(sim > min_seed_sim) || !(sim > 0.0)) continue;
    weight_sum += sim;
    for (std::size_t dim = 0; dim < kVadDimensions; ++dim) {
      const double e = seeds.scores()[i][dim];
      weighted[dim] += sim * e;
      lo[dim] = std::min(lo[dim], e);
      hi[dim] = std::max(hi[dim], e);
    }
  }
  if (!(weight_sum > 0.0)) return std::nullopt;
  for (std::size_t dim = 0; dim < kVadDimensions; ++dim) {
    weighted[dim] = std::clamp(weighted[dim] / weight_sum, lo[dim], hi[dim]);
  }
  return weighted;
}

VadScore induce_emotion(std::string_view word, const corpus::Vocabulary& vocab,
                        const embed::EmbeddingModel& model, const SeedLexicon& seeds, double min_seed_sim) {
  const auto id = vocab.id(word);
  if (!id) throw Error(ErrorCode::kUnknownWord, "'" + std::string(word) + "' not in vocabulary", std::string(word));
  const SeedIndex index(seeds, vocab);
  if (auto score = try_induce(*id, model, index, min_seed_sim)) return *score;
  throw Error(ErrorCode::kNoUsableSeeds, "no seed of '" + std::string(word) + "' exceeds the similarity threshold",
              std::string(word));
}

InducedLexicon induce_lexicon(std::span<const SliceEmbedding> slices, const SeedLexicon& seeds,
                              std::span<const std::string> targets, double min_seed_sim,
                              const OmissionHandler& on_omission) {
  if (slices.empty()) throw Error(ErrorCode::kInvalidArgument, "induce_lexicon needs at least one slice");
  InducedLexicon out;
  for (const auto& slice : slices) {
    const SeedIndex index(seeds, *slice.vocab);
    for (const auto& target : targets) {
      const auto id = slice.vocab->id(target);
      if (!id) {
        if (on_omission) on_omission(slice.slice_id, target, "UnknownWord");
        continue;
      }
      if (auto score = try_induce(*id, *slice.model, index, min_seed_sim)) {
        out.emplace(std::make_pair(slice.slice_id, target), *score);
      } else if (on_omission) {
        on_omission(slice.slice_id, target, "NoUsableSeeds");
      }
    }
  }
  return out;
}

std::vector<double> zscale_series(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance /= static_cast<double>(values.size());
  const double stddev = std::sqrt(variance);
  if (!(stddev > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / stddev;
  return out;
}

EmotionSeries EmotionSeries::from_points(std::string word, std::vector<EmotionPoint> points) {
  EmotionSeries series;
  series.word = std::move(word);
  series.display_points = points;
  for (std::size_t dim = 0; dim < kVadDimensions; ++dim) {
    std::vector<double> raw;
    raw.reserve(points.size());
    for (const auto& p : points) raw.push_back(p.score[dim]);
    const auto scaled = zscale_series(raw);
    for (std::size_t i = 0; i < points.size(); ++i) series.display_points[i].score[dim] = scaled[i];
  }
  series.points = std::move(points);
  return series;
}

void write_induced_csv(std::ostream& out, const InducedLexicon& lexicon) {
  std::map<std::pair<std::string, int>, VadScore> by_word;
  for (const auto& [key, score] : lexicon) by_word.emplace(std::make_pair(key.second, key.first), score);
  out << "word,slice,valence,arousal,dominance\n";
  for (const auto& [key, score] : by_word) {
    out << key.first << ',' << key.second << ',' << detail::format_double(score.valence) << ','
        << detail::format_double(score.arousal) << ',' << detail::format_double(score.dominance) << '\n';
  }
}

}  // namespace jeseme::emotion
