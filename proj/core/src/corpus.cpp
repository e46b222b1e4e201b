#include "jeseme/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <locale>
#include <map>
#include <set>
#include <sstream>

#include "jeseme/error.hpp"
#include "json.hpp"

namespace jeseme::corpus {
namespace {

constexpr int kMinDocumentYear = 1000;
constexpr int kMaxDocumentYear = 2100;

const std::ctype<wchar_t>* unicode_ctype() {
  static const std::ctype<wchar_t>* facet = []() -> const std::ctype<wchar_t>* {
    for (const char* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
      try {
        static const std::locale loc(name);
        return &std::use_facet<std::ctype<wchar_t>>(loc);
      } catch (const std::runtime_error&) {
      }
    }
    return nullptr;
  }();
  return facet;
}

// Decodes one code point starting at text[pos]; returns its byte length, or
// 0 for an invalid sequence.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& cp) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  std::size_t len = 0;
  if (lead < 0x80) {
    cp = lead;
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return 0;
  }
  if (pos + len > text.size()) return 0;
  for (std::size_t i = 1; i < len; ++i) {
    if ((byte(pos + i) & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (byte(pos + i) & 0x3F);
  }
  return len;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string(), path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

SlicingMode parse_mode(std::string_view name) {
  if (name == "fixed_span") return SlicingMode::kFixedSpan;
  if (name == "balanced") return SlicingMode::kBalanced;
  throw Error(ErrorCode::kInvalidManifest, "unknown slicing.mode '" + std::string(name) + "'");
}

TimeSlice make_slice(int start, int end, std::int64_t tokens) {
  TimeSlice slice;
  slice.label_year = start;
  slice.start_year = start;
  slice.end_year = end;
  slice.token_count = tokens;
  return slice;
}

std::string year_range(int start, int end) {
  return std::to_string(start) + "-" + std::to_string(end);
}

}  // namespace

std::string_view to_string(Language language) {
  return language == Language::kEnglish ? "english" : "german";
}

Language parse_language(std::string_view name) {
  if (name == "english") return Language::kEnglish;
  if (name == "german") return Language::kGerman;
  throw Error(ErrorCode::kInvalidManifest, "unknown language '" + std::string(name) + "'");
}

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  const auto* facet = unicode_ctype();
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, pos, cp);
    if (len == 0) {
      out.push_back(text[pos++]);
      continue;
    }
    if (cp < 0x80) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(cp))));
    } else if (facet != nullptr) {
      encode_utf8(static_cast<char32_t>(facet->tolower(static_cast<wchar_t>(cp))), out);
    } else {
      out.append(text.substr(pos, len));
    }
    pos += len;
  }
  return out;
}

LemmaTable LemmaTable::from_pairs(std::vector<std::pair<std::string, std::string>> pairs) {
  std::map<std::string, std::string> raw;
  for (auto& [surface, lemma] : pairs) {
    if (surface.empty() || lemma.empty()) continue;
    raw.emplace(to_lower_utf8(surface), to_lower_utf8(lemma));  // first entry wins
  }

  LemmaTable table;
  for (const auto& [surface, first] : raw) {
    // Follow the chain to a fixed point; on a cycle pick its smallest member.
    std::vector<std::string> path{surface};
    std::set<std::string> seen{surface};
    std::string current = first;
    std::string resolved;
    while (true) {
      if (seen.count(current) != 0) {
        auto cycle_begin = std::find(path.begin(), path.end(), current);
        resolved = *std::min_element(cycle_begin, path.end());
        break;
      }
      auto next = raw.find(current);
      if (next == raw.end()) {
        resolved = current;
        break;
      }
      seen.insert(current);
      path.push_back(current);
      current = next->second;
    }
    if (resolved != surface) table.lemmas_.emplace(surface, resolved);
  }
  return table;
}

LemmaTable LemmaTable::load_tsv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(line_no) + ": expected two tab-separated columns",
                  path.string());
    }
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return from_pairs(std::move(pairs));
}

const std::string* LemmaTable::find(std::string_view surface) const {
  auto it = lemmas_.find(std::string(surface));
  return it == lemmas_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, std::string>> LemmaTable::entries() const {
  std::vector<std::pair<std::string, std::string>> out(lemmas_.begin(), lemmas_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string normalize_token(std::string_view raw, Language language, const LemmaTable* lemmas) {
  std::string lowered = to_lower_utf8(raw);
  if (language == Language::kGerman && lemmas != nullptr) {
    if (const std::string* lemma = lemmas->find(lowered)) return *lemma;
  }
  return lowered;
}

Normalizer::Normalizer(Language language, std::optional<LemmaTable> lemmas)
    : language_(language), lemmas_(std::move(lemmas)) {
  if (language_ == Language::kEnglish && lemmas_) {
    throw Error(ErrorCode::kInvalidManifest, "english corpora must not carry a lemma table");
  }
}

std::string Normalizer::operator()(std::string_view raw) const {
  return normalize_token(raw, language_, lemmas());
}

Tokenizer::Tokenizer(std::string strip_pattern)
    : pattern_(std::move(strip_pattern)), fast_path_(pattern_ == kDefaultStripPattern) {
  if (!fast_path_) {
    try {
      regex_ = std::regex(pattern_, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kInvalidArgument, "bad token strip pattern '" + pattern_ + "': " + e.what());
    }
  }
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::string stripped;
  if (fast_path_) {
    // Same result as the default regex: ASCII punctuation in the C locale.
    stripped.assign(text);
    for (char& c : stripped) {
      if (std::ispunct(static_cast<unsigned char>(c)) != 0) c = ' ';
    }
  } else {
    stripped = std::regex_replace(std::string(text), regex_, " ");
  }

  std::vector<std::string> tokens;
  std::size_t pos = 0;
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (pos < stripped.size()) {
    while (pos < stripped.size() && is_space(stripped[pos])) ++pos;
    const std::size_t begin = pos;
    while (pos < stripped.size() && !is_space(stripped[pos])) ++pos;
    if (pos > begin) tokens.emplace_back(stripped.substr(begin, pos - begin));
  }
  return tokens;
}

void CorpusManifest::validate() const {
  if (corpus_id.empty()) throw Error(ErrorCode::kInvalidManifest, "corpus_id must be non-empty");
  for (const auto& doc : documents) {
    if (doc.year < kMinDocumentYear || doc.year > kMaxDocumentYear) {
      throw Error(ErrorCode::kInvalidManifest,
                  "document year " + std::to_string(doc.year) + " outside [1000, 2100]: " + doc.path.string());
    }
  }
  if (language == Language::kEnglish && lemma_table_path) {
    throw Error(ErrorCode::kInvalidManifest, "english manifests must not carry a lemma table");
  }
  const auto& s = slicing;
  if (s.min_span_years < 1 || s.min_span_years > s.max_span_years) {
    throw Error(ErrorCode::kInvalidManifest, "slicing span bounds must satisfy 1 <= min <= max");
  }
  if (s.mode == SlicingMode::kFixedSpan && s.span_years < 1) {
    throw Error(ErrorCode::kInvalidManifest, "slicing.span_years must be positive");
  }
  if (s.mode == SlicingMode::kBalanced && s.target_slices < 1) {
    throw Error(ErrorCode::kInvalidManifest, "slicing.target_slices must be positive");
  }
}

CorpusManifest CorpusManifest::from_json_text(std::string_view text,
                                              const std::filesystem::path& base_dir) {
  CorpusManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.corpus_id = j.at("corpus_id").get<std::string>();
    m.language = parse_language(j.at("language").get<std::string>());
    if (j.contains("slicing")) {
      const auto& s = j.at("slicing");
      m.slicing.mode = parse_mode(s.value("mode", std::string("fixed_span")));
      m.slicing.span_years = s.value("span_years", m.slicing.span_years);
      m.slicing.target_slices = s.value("target_slices", m.slicing.target_slices);
      m.slicing.min_span_years = s.value("min_span_years", m.slicing.min_span_years);
      m.slicing.max_span_years = s.value("max_span_years", m.slicing.max_span_years);
    }
    if (j.contains("lemma_table") && !j.at("lemma_table").is_null()) {
      m.lemma_table_path = base_dir / j.at("lemma_table").get<std::string>();
    }
    for (const auto& doc : j.value("documents", nlohmann::json::array())) {
      m.documents.push_back({doc.at("year").get<int>(), base_dir / doc.at("path").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, e.what());
  }
  m.validate();
  return m;
}

CorpusManifest CorpusManifest::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path), path.parent_path());
}

std::vector<TimeSlice> build_slices(std::span<const DocumentMass> documents,
                                    const SlicingConfig& config) {
  if (documents.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents");

  std::map<int, std::int64_t> mass_by_year;
  std::int64_t total = 0;
  for (const auto& doc : documents) {
    mass_by_year[doc.year] += doc.tokens;
    total += doc.tokens;
  }
  const std::vector<std::pair<int, std::int64_t>> years(mass_by_year.begin(), mass_by_year.end());
  const int first_year = years.front().first;
  const int last_year = years.back().first;
  const int min_span = config.min_span_years;
  const int max_span = config.max_span_years;

  std::vector<TimeSlice> slices;
  if (config.mode == SlicingMode::kFixedSpan) {
    if (config.span_years < min_span || config.span_years > max_span) {
      throw Error(ErrorCode::kInfeasibleSlicing,
                  "span_years " + std::to_string(config.span_years) + " outside [" +
                      std::to_string(min_span) + ", " + std::to_string(max_span) + "]");
    }
    for (int start = first_year; start <= last_year; start += config.span_years) {
      const int end = std::min(start + config.span_years - 1, last_year);
      std::int64_t tokens = 0;
      bool has_document = false;
      for (auto it = mass_by_year.lower_bound(start); it != mass_by_year.end() && it->first <= end; ++it) {
        tokens += it->second;
        has_document = true;
      }
      if (!has_document) {
        throw Error(ErrorCode::kInfeasibleSlicing, "slice " + year_range(start, end) + " holds no documents");
      }
      slices.push_back(make_slice(start, end, tokens));
    }
  } else {
    const double threshold = static_cast<double>(total) / config.target_slices;
    int start = first_year;
    std::int64_t mass = 0;
    for (std::size_t i = 0; i < years.size(); ++i) {
      const auto [year, year_mass] = years[i];
      mass += year_mass;
      if (i + 1 == years.size()) {
        slices.push_back(make_slice(start, last_year, mass));
        break;
      }
      const int next_year = years[i + 1].first;
      const bool must_close = next_year > start + max_span - 1;
      const bool want_close = static_cast<double>(mass) >= threshold;
      const int earliest_end = std::max(year, start + min_span - 1);
      const int latest_end = std::min(next_year - 1, start + max_span - 1);
      if ((must_close || want_close) && earliest_end <= latest_end) {
        slices.push_back(make_slice(start, latest_end, mass));
        start = latest_end + 1;
        mass = 0;
        if (next_year > start + max_span - 1) {
          throw Error(ErrorCode::kInfeasibleSlicing,
                      "no documents between " + std::to_string(start) + " and " +
                          std::to_string(next_year - 1) + " (longer than max_span_years)");
        }
      }
    }
    // A short or light tail is folded into its predecessor when the merged
    // span fits, otherwise the boundary between the two is moved to even out their mass.
    if (slices.size() >= 2) {
      const TimeSlice tail = slices.back();
      const TimeSlice prev = slices[slices.size() - 2];
      const bool too_short = tail.span() < min_span;
      const bool too_light = static_cast<double>(tail.token_count) < 0.5 * threshold;
      if ((too_short || too_light) && tail.end_year - prev.start_year + 1 <= max_span) {
        slices.pop_back();
        slices.back() = make_slice(prev.start_year, tail.end_year, prev.token_count + tail.token_count);
      } else if (too_short || too_light) {
        const std::int64_t pair_mass = prev.token_count + tail.token_count;
        int best_end = prev.end_year;
        std::int64_t best_gap = std::abs(prev.token_count - tail.token_count);
        std::int64_t left = 0;
        auto it = mass_by_year.lower_bound(prev.start_year);
        for (int end = prev.start_year; end < tail.end_year; ++end) {
          bool left_has_doc = left > 0;
          for (; it != mass_by_year.end() && it->first <= end; ++it) {
            left += it->second;
            left_has_doc = true;
          }
          const int left_span = end - prev.start_year + 1;
          const int right_span = tail.end_year - end;
          if (left_span < min_span || left_span > max_span || right_span < min_span || right_span > max_span) continue;
          if (!left_has_doc || mass_by_year.lower_bound(end + 1) == mass_by_year.end()) continue;
          const std::int64_t gap = std::abs(left - (pair_mass - left));
          if (gap < best_gap) {
            best_gap = gap;
            best_end = end;
          }
        }
        if (best_end != prev.end_year) {
          std::int64_t left_mass = 0;
          for (auto y = mass_by_year.lower_bound(prev.start_year); y != mass_by_year.end() && y->first <= best_end; ++y) {
            left_mass += y->second;
          }
          slices[slices.size() - 2] = make_slice(prev.start_year, best_end, left_mass);
          slices.back() = make_slice(best_end + 1, tail.end_year, pair_mass - left_mass);
        }
      }
    }
  }

  for (std::size_t i = 0; i < slices.size(); ++i) slices[i].slice_id = static_cast<int>(i);
  return slices;
}

Corpus load_corpus(const CorpusManifest& manifest, const Tokenizer& tokenizer) {
  manifest.validate();
  std::optional<LemmaTable> lemmas;
  if (manifest.lemma_table_path) lemmas = LemmaTable::load_tsv(*manifest.lemma_table_path);
  Corpus corpus{manifest, Normalizer(manifest.language, std::move(lemmas)), {}};
  corpus.documents.reserve(manifest.documents.size());
  for (const auto& ref : manifest.documents) {
    Document doc;
    doc.year = ref.year;
    for (const auto& raw : tokenizer.tokenize(read_file(ref.path))) doc.tokens.push_back(corpus.normalizer(raw));
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::vector<TimeSlice> build_slices(const Corpus& corpus) {
  std::vector<DocumentMass> masses;
  masses.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    masses.push_back({doc.year, static_cast<std::int64_t>(doc.tokens.size())});
  }
  return build_slices(masses, corpus.manifest.slicing);
}

std::vector<std::vector<std::size_t>> assign_documents(const Corpus& corpus,
                                                       std::span<const TimeSlice> slices) {
  std::vector<std::vector<std::size_t>> members(slices.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const int year = corpus.documents[d].year;
    auto it = std::find_if(slices.begin(), slices.end(), [&](const TimeSlice& s) { return s.contains(year); });
    if (it != slices.end()) members[static_cast<std::size_t>(it - slices.begin())].push_back(d);
  }
  return members;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> words, std::vector<std::int64_t> counts,
                                    std::int64_t min_count) {
  if (words.size() != counts.size()) {
    throw Error(ErrorCode::kConsistencyError, "vocabulary words/counts length mismatch");
  }
  Vocabulary vocab;
  vocab.min_count_ = min_count;
  vocab.ids_.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (counts[i] < min_count) {
      throw Error(ErrorCode::kConsistencyError, "count of '" + words[i] + "' below min_count", words[i]);
    }
    if (!vocab.ids_.emplace(words[i], static_cast<WordId>(i)).second) {
      throw Error(ErrorCode::kConsistencyError, "duplicate vocabulary entry '" + words[i] + "'", words[i]);
    }
  }
  vocab.words_ = std::move(words);
  vocab.counts_ = std::move(counts);
  return vocab;
}

std::optional<WordId> Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

namespace {

Vocabulary vocabulary_from_counts(const std::unordered_map<std::string, std::int64_t>& counts,
                                  std::int64_t min_count) {
  if (min_count < 1) throw Error(ErrorCode::kInvalidArgument, "min_count must be >= 1");
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [word, count] : counts) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary, "no word reaches min_count " + std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::int64_t> values;
  words.reserve(kept.size());
  values.reserve(kept.size());
  for (auto& [word, count] : kept) {
    words.push_back(std::move(word));
    values.push_back(count);
  }
  return Vocabulary::from_entries(std::move(words), std::move(values), min_count);
}

}  // namespace

Vocabulary build_vocabulary(std::span<const std::string> tokens, std::int64_t min_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& token : tokens) ++counts[token];
  return vocabulary_from_counts(counts, min_count);
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            std::int64_t min_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& doc : documents) {
    for (const auto& token : doc) ++counts[token];
  }
  return vocabulary_from_counts(counts, min_count);
}

std::vector<std::vector<WordId>> encode_documents(
    std::span<const std::vector<std::string>> documents, const Vocabulary& vocab) {
  std::vector<std::vector<WordId>> encoded;
  encoded.reserve(documents.size());
  for (const auto& doc : documents) {
    std::vector<WordId> ids;
    ids.reserve(doc.size());
    for (const auto& token : doc) ids.push_back(vocab.id(token).value_or(-1));
    encoded.push_back(std::move(ids));
  }
  return encoded;
}

}  // namespace jeseme::corpus
