#include <istream>
#include <ostream>
#include <sstream>

#include "jeseme/error.hpp"
#include "store_tables.hpp"
#include "text_format.hpp"

namespace jeseme::store::detail {
namespace {

using jeseme::detail::format_double;
using jeseme::detail::format_float;
using jeseme::detail::parse_number;

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << quote(fields), first = false), ...);
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kFormatError, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

const std::vector<std::string>& header_of(Table table) {
  static const std::map<Table, std::vector<std::string>> headers{
      {Table::kCorpora,
       {"corpus_id", "language", "dimension", "window", "min_count", "alpha", "eig_weight", "svd_seed", "neighbors",
        "contexts", "min_seed_sim"}},
      {Table::kLemmas, {"corpus_id", "surface", "lemma"}},
      {Table::kSlices, {"corpus_id", "slice_id", "label_year", "start_year", "end_year", "token_count"}},
      {Table::kWords, {"corpus_id", "slice_id", "word_id", "word", "count"}},
      {Table::kVectors, {"corpus_id", "slice_id", "word_id", "values"}},
      {Table::kEmotions, {"corpus_id", "slice_id", "word_id", "valence", "arousal", "dominance"}},
      {Table::kTopSimilar, {"corpus_id", "slice_id", "word_id", "rank", "neighbor_id", "cosine"}},
      {Table::kContexts, {"corpus_id", "slice_id", "word_id", "rank", "context_id", "ppmi"}},
  };
  return headers.at(table);
}

template <typename T>
T number(const std::string& text, std::size_t line, std::string_view column) {
  T value{};
  if (!parse_number(text, value)) {
    throw Error(ErrorCode::kFormatError,
                "CSV record " + std::to_string(line) + ": bad " + std::string(column) + " '" + text + "'");
  }
  return value;
}

std::string join_floats(const std::vector<float>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_float(values[i]);
  }
  return out;
}

std::vector<float> split_floats(const std::string& text, std::size_t line) {
  std::vector<float> values;
  std::istringstream in(text);
  std::string token;
  while (in >> token) values.push_back(number<float>(token, line, "values"));
  return values;
}

std::string str(int v) { return std::to_string(v); }
std::string str(std::int64_t v) { return std::to_string(v); }
std::string str(std::uint64_t v) { return std::to_string(v); }

}  // namespace

void write_csv(Table table, const Tables& t, std::ostream& out) {
  CsvWriter csv(out);
  const auto& h = header_of(table);
  out << [&] {
    std::string line;
    for (std::size_t i = 0; i < h.size(); ++i) line += (i ? "," : "") + h[i];
    return line + "\n";
  }();
  switch (table) {
    case Table::kCorpora:
      for (const auto& r : t.corpora) {
        const auto& p = r.params;
        csv.row(r.corpus_id, std::string(corpus::to_string(r.language)), str(p.dimension), str(p.window),
                str(p.min_count), format_double(p.alpha), format_double(p.eig_weight), str(p.svd_seed),
                str(p.neighbors), str(p.contexts), format_double(p.min_seed_sim));
      }
      break;
    case Table::kLemmas:
      for (const auto& r : t.lemmas) csv.row(r.corpus_id, r.surface, r.lemma);
      break;
    case Table::kSlices:
      for (const auto& r : t.slices) {
        csv.row(r.corpus_id, str(r.slice.slice_id), str(r.slice.label_year), str(r.slice.start_year),
                str(r.slice.end_year), str(r.slice.token_count));
      }
      break;
    case Table::kWords:
      for (const auto& r : t.words) csv.row(r.corpus_id, str(r.slice_id), str(r.word_id), r.word, str(r.count));
      break;
    case Table::kVectors:
      for (const auto& r : t.vectors) csv.row(r.corpus_id, str(r.slice_id), str(r.word_id), join_floats(r.values));
      break;
    case Table::kEmotions:
      for (const auto& r : t.emotions) {
        csv.row(r.corpus_id, str(r.slice_id), str(r.word_id), format_double(r.score.valence),
                format_double(r.score.arousal), format_double(r.score.dominance));
      }
      break;
    case Table::kTopSimilar:
    case Table::kContexts:
      for (const auto& r : table == Table::kTopSimilar ? t.top_similar : t.contexts) {
        csv.row(r.corpus_id, str(r.slice_id), str(r.word_id), str(r.rank), str(r.other), format_double(r.value));
      }
      break;
  }
}

void read_csv(Table table, std::istream& in, Tables& t) {
  const auto records = parse_csv(in);
  const auto& h = header_of(table);
  if (records.empty() || records.front() != h) {
    throw Error(ErrorCode::kFormatError, "CSV header for table " + std::string(to_string(table)) + " must be " +
                                             [&] {
                                               std::string line;
                                               for (std::size_t i = 0; i < h.size(); ++i) line += (i ? "," : "") + h[i];
                                               return line;
                                             }());
  }
  const auto ranked_rows = [&](std::vector<RankedRow>& rows, std::string_view other_column,
                               std::string_view value_column) {
    rows.clear();
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& f = records[i];
      rows.push_back({f[0], number<int>(f[1], i, "slice_id"), number<WordId>(f[2], i, "word_id"),
                      number<int>(f[3], i, "rank"), number<WordId>(f[4], i, other_column),
                      number<double>(f[5], i, value_column)});
    }
  };
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != h.size()) {
      throw Error(ErrorCode::kFormatError, "CSV record " + std::to_string(i) + ": expected " +
                                               std::to_string(h.size()) + " fields");
    }
  }
  switch (table) {
    case Table::kCorpora:
      t.corpora.clear();
      for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        CorpusRow r;
        r.corpus_id = f[0];
        r.language = corpus::parse_language(f[1]);
        r.params.dimension = number<int>(f[2], i, "dimension");
        r.params.window = number<int>(f[3], i, "window");
        r.params.min_count = number<std::int64_t>(f[4], i, "min_count");
        r.params.alpha = number<double>(f[5], i, "alpha");
        r.params.eig_weight = number<double>(f[6], i, "eig_weight");
        r.params.svd_seed = number<std::uint64_t>(f[7], i, "svd_seed");
        r.params.neighbors = number<int>(f[8], i, "neighbors");
        r.params.contexts = number<int>(f[9], i, "contexts");
        r.params.min_seed_sim = number<double>(f[10], i, "min_seed_sim");
        t.corpora.push_back(std::move(r));
      }
      break;
    case Table::kLemmas:
      t.lemmas.clear();
      for (std::size_t i = 1; i < records.size(); ++i) t.lemmas.push_back({records[i][0], records[i][1], records[i][2]});
      break;
    case Table::kSlices:
      t.slices.clear();
      for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        SliceRow r;
        r.corpus_id = f[0];
        r.slice.slice_id = number<int>(f[1], i, "slice_id");
        r.slice.label_year = number<int>(f[2], i, "label_year");
        r.slice.start_year = number<int>(f[3], i, "start_year");
        r.slice.end_year = number<int>(f[4], i, "end_year");
        r.slice.token_count = number<std::int64_t>(f[5], i, "token_count");
        t.slices.push_back(std::move(r));
      }
      break;
    case Table::kWords:
      t.words.clear();
      for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        t.words.push_back({f[0], number<int>(f[1], i, "slice_id"), number<WordId>(f[2], i, "word_id"), f[3],
                           number<std::int64_t>(f[4], i, "count")});
      }
      break;
    case Table::kVectors:
      t.vectors.clear();
      for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        t.vectors.push_back(
            {f[0], number<int>(f[1], i, "slice_id"), number<WordId>(f[2], i, "word_id"), split_floats(f[3], i)});
      }
      break;
    case Table::kEmotions:
      t.emotions.clear();
      for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        t.emotions.push_back({f[0], number<int>(f[1], i, "slice_id"), number<WordId>(f[2], i, "word_id"),
                              emotion::VadScore{number<double>(f[3], i, "valence"), number<double>(f[4], i, "arousal"),
                                                number<double>(f[5], i, "dominance")}});
      }
      break;
    case Table::kTopSimilar:
      ranked_rows(t.top_similar, "neighbor_id", "cosine");
      break;
    case Table::kContexts:
      ranked_rows(t.contexts, "context_id", "ppmi");
      break;
  }
}

}  // namespace jeseme::store::detail
