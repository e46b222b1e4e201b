#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jeseme/embed.hpp"
#include "jeseme/error.hpp"
#include "jeseme/store.hpp"

namespace jeseme::pipeline {

struct CorpusSource {
  std::filesystem::path manifest;
  std::filesystem::path seed_lexicon;
};

// Every hyperparameter of a build. Loaded from a JSON config file; the CLI
// overrides individual fields from flags.
struct PipelineConfig {
  std::vector<CorpusSource> corpora;
  std::filesystem::path store;
  store::CorpusParams params;
  int workers = 1;
  std::string token_pattern = std::string(corpus::kDefaultStripPattern);
  embed::SvdOptions svd{.seed = 1, .oversampling = 10, .min_power_iterations = 4, .max_power_iterations = 30,
                        .tolerance = 1e-10};

  // Relative paths resolve against `base_dir`. Throws Error(kInvalidArgument).
  static PipelineConfig from_json_text(std::string_view text, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
  void validate() const;
};

// Error raised by a pipeline stage; what() reads
// "<Code>: [<stage>] <corpus>/<slice>: <message>".
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause, const std::string& where);
  const std::string& stage() const noexcept { return stage_; }
  // The cause's message without code, stage or location.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string stage_;
  std::string detail_;
};

struct SliceStats {
  std::string corpus_id;
  corpus::TimeSlice slice;
  std::size_t vocab_size = 0;
  std::size_t cooc_nnz = 0;
  std::size_t ppmi_nnz = 0;
  std::vector<double> singular_values;  // leading values
  int svd_iterations = 0;
  std::size_t emotions = 0;
  double seconds = 0.0;
};

struct BuildReport {
  std::vector<SliceStats> slices;
  std::vector<store::WriteReceipt> receipts;
};

using Logger = std::function<void(const std::string&)>;

// Ranked PPMI contexts of one word: value descending, ties by context word.
std::vector<store::ContextEntry> top_contexts(WordId word, const corpus::Vocabulary& vocab,
                                              const embed::PpmiMatrix& ppmi, int k);

// Builds one slice from its documents' normalized tokens.
store::SliceRecord build_slice(const corpus::TimeSlice& slice, std::span<const std::vector<std::string>> documents,
                               const store::CorpusParams& params, const emotion::SeedLexicon& seeds,
                               const embed::SvdOptions& svd, SliceStats* stats = nullptr);

// Runs every corpus through the full chain. Throws StageError.
store::ModelStore build_store(const PipelineConfig& config, const Logger& log = {}, BuildReport* report = nullptr);
// build_store followed by ModelStore::save(config.store).
BuildReport run_build(const PipelineConfig& config, const Logger& log = {});

}  // namespace jeseme::pipeline
