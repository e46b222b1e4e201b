#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jeseme/store.hpp"

namespace jeseme::service {

struct Point {
  int x = 0;  // slice label year
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Curve {
  std::string name;
  std::vector<Point> points;

  friend bool operator==(const Curve&, const Curve&) = default;
};

struct RankedItem {
  std::string word;
  double score = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct RankedSlice {
  int x = 0;
  std::vector<RankedItem> items;

  friend bool operator==(const RankedSlice&, const RankedSlice&) = default;
};

struct ResponseMeta {
  std::string scale = "raw";
  int k = 0;
  int d = 0;

  friend bool operator==(const ResponseMeta&, const ResponseMeta&) = default;
};

// Uniform envelope {corpus, words, curves, meta}. `contexts` is filled by
// the typical-context endpoint and `neighbors` by the most-similar endpoint.
// Missing data points are omitted, never null.
struct ApiResponse {
  std::string corpus;
  std::vector<std::string> words;
  std::vector<Curve> curves;
  ResponseMeta meta;
  std::vector<RankedSlice> contexts;
  std::vector<RankedItem> neighbors;

  friend bool operator==(const ApiResponse&, const ApiResponse&) = default;
};

struct SliceDescriptor {
  int label = 0;
  int start_year = 0;
  int end_year = 0;
};

struct CorpusDescriptor {
  std::string corpus_id;
  std::string language;
  std::vector<SliceDescriptor> slices;
};

enum class EmotionScale { kRaw, kZscored };
// "raw" / "zscored"; throws Error(kInvalidArgument).
EmotionScale parse_scale(std::string_view name);

using QueryParams = std::map<std::string, std::string, std::less<>>;

struct HttpResult {
  int status = 200;
  std::string body;
};

std::string to_json(const ApiResponse& response);
std::string to_json(const std::vector<CorpusDescriptor>& corpora);

// Read-only query layer over a loaded store. Query words are normalized
// with the corpus' own normalizer before lookup and echoed normalized.
class Api {
 public:
  explicit Api(std::shared_ptr<const store::ModelStore> store);

  std::vector<CorpusDescriptor> corpora() const;
  ApiResponse similarity(std::string_view corpus, std::string_view word1, std::string_view word2) const;
  ApiResponse emotion(std::string_view corpus, std::string_view word, EmotionScale scale) const;
  ApiResponse frequency(std::string_view corpus, std::string_view word) const;
  // k defaults to the cached context count and is capped by it.
  ApiResponse typical_context(std::string_view corpus, std::string_view word, std::optional<int> k = {}) const;
  // k defaults to the cached neighbor count.
  ApiResponse most_similar(std::string_view corpus, std::string_view word, std::optional<int> k = {}) const;

  // Routes /api/<endpoint> and maps errors: unknown word/corpus -> 404,
  // bad or missing parameters -> 400, unknown path -> 404.
  HttpResult handle(std::string_view path, const QueryParams& params) const;

  const store::ModelStore& store() const { return *store_; }

 private:
  std::shared_ptr<const store::ModelStore> store_;
};

}  // namespace jeseme::service
