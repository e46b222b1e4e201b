#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jeseme/service.hpp"

namespace jeseme::query {

enum class Subcommand { kSimilarity, kEmotion, kFrequency, kContext, kNeighbors };
// Throws Error(kInvalidArgument).
Subcommand parse_subcommand(std::string_view name);
std::string_view to_string(Subcommand sub);

struct QueryRequest {
  std::string corpus;
  Subcommand subcommand = Subcommand::kSimilarity;
  std::vector<std::string> words;  // two for similarity, one otherwise
  service::EmotionScale scale = service::EmotionScale::kRaw;
  std::optional<int> k;
};

struct QueryOutcome {
  int exit_code = 0;  // 0 ok, 1 unknown word, 2 unknown corpus / unreadable store / bad arguments
  std::string out;
  std::string err;
};

// Tab-separated rows rendered from the same ApiResponse the REST layer
// serializes:
//   similarity, frequency   label<TAB>value
//   emotion                 label<TAB>V<TAB>A<TAB>D
//   context                 label<TAB>word<TAB>ppmi
//   neighbors               word<TAB>cosine
std::string render(Subcommand sub, const service::ApiResponse& response);

service::ApiResponse execute(const service::Api& api, const QueryRequest& request);
QueryOutcome run_query(const service::Api& api, const QueryRequest& request);
QueryOutcome run_query(const std::filesystem::path& store_path, const QueryRequest& request);

}  // namespace jeseme::query
