#include "jeseme/query.hpp"

#include <map>

#include "jeseme/error.hpp"
#include "text_format.hpp"

namespace jeseme::query {
namespace {

using jeseme::detail::format_double;

int exit_code_for(ErrorCode code) { return code == ErrorCode::kUnknownWord ? 1 : 2; }

}  // namespace

Subcommand parse_subcommand(std::string_view name) {
  if (name == "similarity") return Subcommand::kSimilarity;
  if (name == "emotion") return Subcommand::kEmotion;
  if (name == "frequency") return Subcommand::kFrequency;
  if (name == "context") return Subcommand::kContext;
  if (name == "neighbors") return Subcommand::kNeighbors;
  throw Error(ErrorCode::kInvalidArgument, "unknown query subcommand", std::string(name));
}

std::string_view to_string(Subcommand sub) {
  switch (sub) {
    case Subcommand::kSimilarity: return "similarity";
    case Subcommand::kEmotion: return "emotion";
    case Subcommand::kFrequency: return "frequency";
    case Subcommand::kContext: return "context";
    case Subcommand::kNeighbors: return "neighbors";
  }
  return "?";
}

std::string render(Subcommand sub, const service::ApiResponse& r) {
  std::string out;
  switch (sub) {
    case Subcommand::kSimilarity:
    case Subcommand::kFrequency:
      for (const auto& curve : r.curves) {
        for (const auto& p : curve.points) out += std::to_string(p.x) + '\t' + format_double(p.y) + '\n';
      }
      break;
    case Subcommand::kEmotion: {
      std::map<int, std::vector<std::string>> rows;
      for (const auto& curve : r.curves) {
        for (const auto& p : curve.points) rows[p.x].push_back(format_double(p.y));
      }
      for (const auto& [x, values] : rows) {
        out += std::to_string(x);
        for (const auto& v : values) out += '\t' + v;
        out += '\n';
      }
      break;
    }
    case Subcommand::kContext:
      for (const auto& slice : r.contexts) {
        for (const auto& item : slice.items) {
          out += std::to_string(slice.x) + '\t' + item.word + '\t' + format_double(item.score) + '\n';
        }
      }
      break;
    case Subcommand::kNeighbors:
      for (const auto& item : r.neighbors) out += item.word + '\t' + format_double(item.score) + '\n';
      break;
  }
  return out;
}

service::ApiResponse execute(const service::Api& api, const QueryRequest& q) {
  const std::size_t expected = q.subcommand == Subcommand::kSimilarity ? 2 : 1;
  if (q.words.size() != expected) {
    throw Error(ErrorCode::kInvalidArgument, std::string(to_string(q.subcommand)) + " takes " +
                                                 std::to_string(expected) + " word(s)");
  }
  switch (q.subcommand) {
    case Subcommand::kSimilarity: return api.similarity(q.corpus, q.words[0], q.words[1]);
    case Subcommand::kEmotion: return api.emotion(q.corpus, q.words[0], q.scale);
    case Subcommand::kFrequency: return api.frequency(q.corpus, q.words[0]);
    case Subcommand::kContext: return api.typical_context(q.corpus, q.words[0], q.k);
    case Subcommand::kNeighbors: return api.most_similar(q.corpus, q.words[0], q.k);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown subcommand");
}

QueryOutcome run_query(const service::Api& api, const QueryRequest& request) {
  try {
    return {0, render(request.subcommand, execute(api, request)), {}};
  } catch (const Error& e) {
    return {exit_code_for(e.code()), {}, std::string(e.what()) + '\n'};
  }
}

QueryOutcome run_query(const std::filesystem::path& store_path, const QueryRequest& request) {
  std::shared_ptr<const store::ModelStore> loaded;
  try {
    loaded = std::make_shared<const store::ModelStore>(store::ModelStore::load(store_path));
  } catch (const Error& e) {
    return {2, {}, "store: " + std::string(e.what()) + '\n'};
  }
  return run_query(service::Api(loaded), request);
}

}  // namespace jeseme::query
