#include "jeseme/service.hpp"

#include <algorithm>
#include <cmath>

#include "jeseme/error.hpp"
#include "json.hpp"
#include "text_format.hpp"

namespace jeseme::service {
namespace {

using nlohmann::json;

void push_point(Curve& curve, int x, double y) {
  if (std::isfinite(y)) curve.points.push_back({x, y});
}

json error_body(const Error& e) {
  json body{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.code() == ErrorCode::kUnknownWord) body["word"] = e.subject();
  if (e.code() == ErrorCode::kUnknownCorpus) body["corpus"] = e.subject();
  return body;
}

const std::string& require(const QueryParams& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end() || it->second.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "missing query parameter '" + name + "'", name);
  }
  return it->second;
}

std::optional<int> optional_int(const QueryParams& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end() || it->second.empty()) return std::nullopt;
  int value = 0;
  if (!detail::parse_number(it->second, value) || value < 1) {
    throw Error(ErrorCode::kInvalidArgument, "parameter '" + name + "' must be a positive integer", name);
  }
  return value;
}

// Normalized word, or UnknownWord when no slice of the corpus knows it.
std::string resolve_word(const store::CorpusInfo& info, const std::vector<std::shared_ptr<const store::SliceRecord>>& slices,
                         std::string_view raw) {
  if (raw.empty()) throw Error(ErrorCode::kInvalidArgument, "empty word");
  std::string word = info.normalizer()(raw);
  const bool known = std::any_of(slices.begin(), slices.end(), [&](const auto& s) { return s->vocab.contains(word); });
  if (!known) throw Error(ErrorCode::kUnknownWord, "'" + word + "' not in corpus " + info.corpus_id, word);
  return word;
}

}  // namespace

EmotionScale parse_scale(std::string_view name) {
  if (name == "raw") return EmotionScale::kRaw;
  if (name == "zscored") return EmotionScale::kZscored;
  throw Error(ErrorCode::kInvalidArgument, "scale must be 'raw' or 'zscored'", std::string(name));
}

std::string to_json(const ApiResponse& r) {
  json curves = json::array();
  for (const auto& c : r.curves) {
    json points = json::array();
    for (const auto& p : c.points) points.push_back({{"x", p.x}, {"y", p.y}});
    curves.push_back({{"name", c.name}, {"points", std::move(points)}});
  }
  json body{{"corpus", r.corpus},
            {"words", r.words},
            {"curves", std::move(curves)},
            {"meta", {{"scale", r.meta.scale}, {"k", r.meta.k}, {"d", r.meta.d}}}};
  if (!r.contexts.empty()) {
    json contexts = json::array();
    for (const auto& slice : r.contexts) {
      json items = json::array();
      for (const auto& item : slice.items) items.push_back({{"word", item.word}, {"score", item.score}});
      contexts.push_back({{"x", slice.x}, {"items", std::move(items)}});
    }
    body["contexts"] = std::move(contexts);
  }
  if (!r.neighbors.empty()) {
    json neighbors = json::array();
    for (const auto& item : r.neighbors) neighbors.push_back({{"word", item.word}, {"score", item.score}});
    body["neighbors"] = std::move(neighbors);
  }
  return body.dump();
}

std::string to_json(const std::vector<CorpusDescriptor>& corpora) {
  json list = json::array();
  for (const auto& c : corpora) {
    json slices = json::array();
    for (const auto& s : c.slices) {
      slices.push_back({{"label", s.label}, {"start_year", s.start_year}, {"end_year", s.end_year}});
    }
    list.push_back({{"corpus_id", c.corpus_id}, {"language", c.language}, {"slices", std::move(slices)}});
  }
  return list.dump();
}

Api::Api(std::shared_ptr<const store::ModelStore> store) : store_(std::move(store)) {
  if (!store_) throw Error(ErrorCode::kInvalidArgument, "Api needs a store");
}

std::vector<CorpusDescriptor> Api::corpora() const {
  std::vector<CorpusDescriptor> out;
  for (const auto& id : store_->corpus_ids()) {
    CorpusDescriptor descriptor;
    descriptor.corpus_id = id;
    descriptor.language = std::string(corpus::to_string(store_->corpus(id).language));
    for (const auto& s : store_->slices(id)) {
      descriptor.slices.push_back({s->slice.label_year, s->slice.start_year, s->slice.end_year});
    }
    out.push_back(std::move(descriptor));
  }
  return out;
}

ApiResponse Api::similarity(std::string_view corpus, std::string_view word1, std::string_view word2) const {
  const auto info = store_->corpus(corpus);
  const auto slices = store_->slices(corpus);
  const std::string a = resolve_word(info, slices, word1);
  const std::string b = resolve_word(info, slices, word2);
  const auto series = store_->similarity_on_the_fly(corpus, a, b);

  ApiResponse r;
  r.corpus = info.corpus_id;
  r.words = {a, b};
  r.meta = {"raw", info.params.neighbors, info.params.dimension};
  Curve curve{b, {}};
  for (const auto& p : series.points) {
    auto it = std::find_if(slices.begin(), slices.end(), [&](const auto& s) { return s->slice.slice_id == p.slice_id; });
    push_point(curve, (*it)->slice.label_year, p.cosine);
  }
  r.curves.push_back(std::move(curve));
  return r;
}

ApiResponse Api::emotion(std::string_view corpus, std::string_view word, EmotionScale scale) const {
  const auto info = store_->corpus(corpus);
  const auto slices = store_->slices(corpus);
  const std::string w = resolve_word(info, slices, word);

  std::vector<emotion::EmotionPoint> points;
  std::vector<int> labels;
  for (const auto& s : slices) {
    const auto id = s->vocab.id(w);
    if (!id) continue;
    if (const auto* score = s->emotion(*id)) {
      points.push_back({s->slice.slice_id, *score});
      labels.push_back(s->slice.label_year);
    }
  }
  const auto series = emotion::EmotionSeries::from_points(w, std::move(points));
  const auto& shown = scale == EmotionScale::kRaw ? series.points : series.display_points;

  ApiResponse r;
  r.corpus = info.corpus_id;
  r.words = {w};
  r.meta = {scale == EmotionScale::kRaw ? "raw" : "zscored", info.params.neighbors, info.params.dimension};
  const char* names[] = {"valence", "arousal", "dominance"};
  for (std::size_t dim = 0; dim < emotion::kVadDimensions; ++dim) {
    Curve curve{names[dim], {}};
    for (std::size_t i = 0; i < shown.size(); ++i) push_point(curve, labels[i], shown[i].score[dim]);
    r.curves.push_back(std::move(curve));
  }
  return r;
}

ApiResponse Api::frequency(std::string_view corpus, std::string_view word) const {
  const auto info = store_->corpus(corpus);
  const auto slices = store_->slices(corpus);
  const std::string w = resolve_word(info, slices, word);

  ApiResponse r;
  r.corpus = info.corpus_id;
  r.words = {w};
  r.meta = {"raw", info.params.neighbors, info.params.dimension};
  Curve curve{w, {}};
  for (const auto& s : slices) {
    const auto id = s->vocab.id(w);
    if (!id || s->slice.token_count <= 0) continue;
    push_point(curve, s->slice.label_year,
               static_cast<double>(s->vocab.count(*id)) / static_cast<double>(s->slice.token_count));
  }
  r.curves.push_back(std::move(curve));
  return r;
}

ApiResponse Api::typical_context(std::string_view corpus, std::string_view word, std::optional<int> k) const {
  const auto info = store_->corpus(corpus);
  const auto slices = store_->slices(corpus);
  const std::string w = resolve_word(info, slices, word);
  const int limit = std::min(k.value_or(info.params.contexts), info.params.contexts);

  ApiResponse r;
  r.corpus = info.corpus_id;
  r.words = {w};
  r.meta = {"raw", limit, info.params.dimension};
  std::map<std::string, Curve> curves;
  for (const auto& s : slices) {
    const auto id = s->vocab.id(w);
    if (!id) continue;
    RankedSlice ranked{s->slice.label_year, {}};
    const auto& list = s->contexts[static_cast<std::size_t>(*id)];
    for (std::size_t i = 0; i < list.size() && static_cast<int>(i) < limit; ++i) {
      const std::string& context = s->vocab.word(list[i].context);
      ranked.items.push_back({context, list[i].ppmi});
      auto& curve = curves[context];
      curve.name = context;
      push_point(curve, s->slice.label_year, list[i].ppmi);
    }
    r.contexts.push_back(std::move(ranked));
  }
  for (auto& [name, curve] : curves) r.curves.push_back(std::move(curve));
  return r;
}

ApiResponse Api::most_similar(std::string_view corpus, std::string_view word, std::optional<int> k) const {
  const auto info = store_->corpus(corpus);
  const auto slices = store_->slices(corpus);
  const std::string w = resolve_word(info, slices, word);
  const int limit = k.value_or(info.params.neighbors);

  ApiResponse r;
  r.corpus = info.corpus_id;
  r.words = {w};
  r.meta = {"raw", limit, info.params.dimension};
  for (const auto& item : store_->get_reference_words(corpus, w, limit)) {
    if (std::isfinite(item.score)) r.neighbors.push_back({item.word, item.score});
  }
  return r;
}

HttpResult Api::handle(std::string_view path, const QueryParams& params) const {
  try {
    if (path == "/api/corpora") return {200, to_json(corpora())};
    if (path == "/api/similarity") {
      return {200, to_json(similarity(require(params, "corpus"), require(params, "word1"), require(params, "word2")))};
    }
    if (path == "/api/emotion") {
      auto it = params.find("scale");
      const auto scale = it == params.end() || it->second.empty() ? EmotionScale::kRaw : parse_scale(it->second);
      return {200, to_json(emotion(require(params, "corpus"), require(params, "word"), scale))};
    }
    if (path == "/api/frequency") return {200, to_json(frequency(require(params, "corpus"), require(params, "word")))};
    if (path == "/api/typicalcontext") {
      return {200, to_json(typical_context(require(params, "corpus"), require(params, "word"), optional_int(params, "k")))};
    }
    if (path == "/api/mostsimilar") {
      return {200, to_json(most_similar(require(params, "corpus"), require(params, "word"), optional_int(params, "k")))};
    }
    return {404, json{{"error", "NotFound"}, {"message", "no endpoint " + std::string(path)}}.dump()};
  } catch (const Error& e) {
    const bool missing = e.code() == ErrorCode::kUnknownWord || e.code() == ErrorCode::kUnknownCorpus;
    return {missing ? 404 : 400, error_body(e).dump()};
  }
}

}  // namespace jeseme::service
