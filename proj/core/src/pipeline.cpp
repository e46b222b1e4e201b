#include "jeseme/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "text_format.hpp"

namespace jeseme::pipeline {
namespace {

using Clock = std::chrono::steady_clock;
using jeseme::detail::format_double;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string strip_code(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

std::string slice_name(const std::string& corpus_id, const corpus::TimeSlice& s) {
  return corpus_id + "/" + std::to_string(s.slice_id) + " (" + std::to_string(s.start_year) + "-" +
         std::to_string(s.end_year) + ")";
}

// Runs `fn` and re-raises any library error attributed to `stage`.
template <typename Fn>
auto stage(const char* name, const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e, where);
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string(), path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

embed::EmbeddingModel pad_model(const embed::EmbeddingModel& model, std::size_t dimension) {
  const std::size_t n = model.size();
  std::vector<float> padded(n * dimension, 0.0f);
  for (std::size_t w = 0; w < n; ++w) {
    const auto v = model.vector(static_cast<WordId>(w));
    std::copy(v.begin(), v.end(), padded.begin() + static_cast<std::ptrdiff_t>(w * dimension));
  }
  std::vector<double> sigma = model.singular_values();
  sigma.resize(dimension, 0.0);
  return embed::EmbeddingModel(model.slice_id(), dimension, std::move(padded), std::move(sigma), model.eig_weight(),
                               model.svd_seed());
}

}  // namespace

StageError::StageError(std::string stage, const Error& cause, const std::string& where)
    : Error(cause.code(), "[" + stage + "] " + (where.empty() ? "" : where + ": ") + strip_code(cause),
            cause.subject()),
      stage_(std::move(stage)),
      detail_(strip_code(cause)) {}

PipelineConfig PipelineConfig::from_json_text(std::string_view text, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto resolve = [&](const std::string& p) { return base_dir / p; };
    const auto source = [&](const nlohmann::json& entry) {
      return CorpusSource{resolve(entry.at("manifest").get<std::string>()),
                          resolve(entry.at("seed_lexicon").get<std::string>())};
    };
    if (j.contains("corpora")) {
      for (const auto& entry : j.at("corpora")) c.corpora.push_back(source(entry));
    } else if (j.contains("manifest")) {
      c.corpora.push_back(source(j));
    }
    if (j.contains("store")) c.store = resolve(j.at("store").get<std::string>());
    auto& p = c.params;
    p.window = j.value("window", p.window);
    p.min_count = j.value("min_count", p.min_count);
    p.dimension = j.value("dimension", p.dimension);
    p.alpha = j.value("alpha", p.alpha);
    p.eig_weight = j.value("eig_weight", p.eig_weight);
    p.svd_seed = j.value("svd_seed", p.svd_seed);
    p.neighbors = j.value("neighbors", p.neighbors);
    p.contexts = j.value("contexts", p.contexts);
    p.min_seed_sim = j.value("min_seed_sim", p.min_seed_sim);
    c.workers = j.value("workers", c.workers);
    c.token_pattern = j.value("token_pattern", c.token_pattern);
    if (j.contains("svd")) {
      const auto& s = j.at("svd");
      c.svd.oversampling = s.value("oversampling", c.svd.oversampling);
      c.svd.min_power_iterations = s.value("min_iterations", c.svd.min_power_iterations);
      c.svd.max_power_iterations = s.value("max_iterations", c.svd.max_power_iterations);
      c.svd.tolerance = s.value("tolerance", c.svd.tolerance);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.svd.seed = c.params.svd_seed;
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  auto config = from_json_text(read_text(path), path.parent_path());
  return config;
}

void PipelineConfig::validate() const {
  const auto fail = [](const std::string& message) { throw Error(ErrorCode::kInvalidArgument, "config: " + message); };
  const auto& p = params;
  if (corpora.empty()) fail("no corpora configured");
  if (p.window < 1) fail("window must be >= 1");
  if (p.min_count < 1) fail("min_count must be >= 1");
  if (p.dimension < 1) fail("dimension must be >= 1");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (!(p.eig_weight >= 0.0 && p.eig_weight <= 1.0)) fail("eig_weight must lie in [0, 1]");
  if (p.neighbors < 1) fail("neighbors must be >= 1");
  if (p.contexts < 1) fail("contexts must be >= 1");
  if (!(p.min_seed_sim >= -1.0 && p.min_seed_sim < 1.0)) fail("min_seed_sim must lie in [-1, 1)");
  if (workers < 1) fail("workers must be >= 1");
  if (svd.oversampling < 0) fail("svd.oversampling must be >= 0");
  if (svd.min_power_iterations < 0 || svd.max_power_iterations < svd.min_power_iterations) {
    fail("svd iterations must satisfy 0 <= min <= max");
  }
  if (!(svd.tolerance >= 0.0)) fail("svd.tolerance must be >= 0");
}

std::vector<store::ContextEntry> top_contexts(WordId word, const corpus::Vocabulary& vocab,
                                              const embed::PpmiMatrix& ppmi, int k) {
  std::vector<store::ContextEntry> row;
  for (const auto& entry : ppmi.row(word)) {
    if (entry.value > 0.0) row.push_back({static_cast<WordId>(entry.column), entry.value});
  }
  const auto better = [&](const store::ContextEntry& a, const store::ContextEntry& b) {
    return a.ppmi != b.ppmi ? a.ppmi > b.ppmi : vocab.word(a.context) < vocab.word(b.context);
  };
  const std::size_t keep = std::min(row.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end(), better);
  row.resize(keep);
  return row;
}

store::SliceRecord build_slice(const corpus::TimeSlice& slice, std::span<const std::vector<std::string>> documents,
                               const store::CorpusParams& params, const emotion::SeedLexicon& seeds,
                               const embed::SvdOptions& svd, SliceStats* stats) {
  const auto start = Clock::now();
  store::SliceRecord record;
  record.slice = slice;

  record.vocab = stage("vocab", "", [&] { return corpus::build_vocabulary(documents, params.min_count); });
  const std::size_t n = record.vocab.size();

  const auto counts = stage("cooc", "", [&] {
    const auto encoded = corpus::encode_documents(documents, record.vocab);
    return cooc::count_cooccurrences(encoded, n, params.window);
  });
  const auto ppmi = stage("ppmi", "", [&] { return embed::ppmi(counts, params.alpha); });

  const auto dimension = static_cast<std::size_t>(params.dimension);
  record.model = stage("svd", "", [&] {
    embed::SvdOptions opts = svd;
    opts.seed = params.svd_seed;
    const int d = static_cast<int>(std::min(dimension, n));
    auto model = embed::truncated_svd(ppmi, d, params.eig_weight, params.svd_seed, slice.slice_id, opts);
    return model.dimension() == dimension ? model : pad_model(model, dimension);
  });

  stage("emotion", "", [&] {
    const emotion::SeedIndex index(seeds, record.vocab);
    for (std::size_t w = 0; w < n; ++w) {
      if (auto score = emotion::try_induce(static_cast<WordId>(w), record.model, index, params.min_seed_sim)) {
        record.emotions.push_back({static_cast<WordId>(w), *score});
      }
    }
  });

  stage("top-k", "", [&] {
    record.top_similar.resize(n);
    for (std::size_t w = 0; w < n; ++w) {
      record.top_similar[w] = embed::top_k_similar(static_cast<WordId>(w), record.vocab, record.model,
                                                   params.neighbors, true);
    }
  });

  record.contexts.resize(n);
  for (std::size_t w = 0; w < n; ++w) {
    record.contexts[w] = top_contexts(static_cast<WordId>(w), record.vocab, ppmi, params.contexts);
  }

  if (stats) {
    stats->slice = slice;
    stats->vocab_size = n;
    stats->cooc_nnz = counts.nnz();
    stats->ppmi_nnz = ppmi.nnz();
    const auto& sigma = record.model.singular_values();
    stats->singular_values.assign(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(5, sigma.size())));
    stats->emotions = record.emotions.size();
    stats->seconds = seconds_since(start);
  }
  return record;
}

store::ModelStore build_store(const PipelineConfig& config, const Logger& log, BuildReport* report) {
  stage("config", "", [&] { config.validate(); });
  const auto say = [&](const std::string& line) {
    if (log) log(line);
  };
  std::mutex log_mutex;
  store::ModelStore out;
  const corpus::Tokenizer tokenizer(config.token_pattern);

  for (const auto& source : config.corpora) {
    const auto started = Clock::now();
    const std::string where = source.manifest.string();
    const auto manifest = stage("manifest", where, [&] { return corpus::CorpusManifest::load(source.manifest); });
    const std::string& id = manifest.corpus_id;
    const auto loaded = stage("corpus", id, [&] { return corpus::load_corpus(manifest, tokenizer); });
    const auto slices = stage("slicing", id, [&] { return corpus::build_slices(loaded); });
    const auto members = corpus::assign_documents(loaded, slices);
    const auto seeds = stage("seeds", id, [&] {
      return emotion::SeedLexicon::load_csv(source.seed_lexicon, manifest.language, &loaded.normalizer);
    });
    say("[" + id + "] " + std::to_string(loaded.documents.size()) + " documents, " + std::to_string(slices.size()) +
        " slices, " + std::to_string(seeds.size()) + " seeds (" + format_double(seconds_since(started)) + " s)");

    store::CorpusInfo info{id, manifest.language, config.params, {}};
    if (loaded.normalizer.lemmas()) info.lemmas = loaded.normalizer.lemmas()->entries();
    out.put_corpus(info);

    std::vector<std::optional<store::SliceRecord>> records(slices.size());
    std::vector<SliceStats> stats(slices.size());
    std::vector<std::exception_ptr> failures(slices.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < slices.size(); i = next++) {
        const std::string name = slice_name(id, slices[i]);
        try {
          std::vector<std::vector<std::string>> docs;
          docs.reserve(members[i].size());
          for (std::size_t d : members[i]) docs.push_back(loaded.documents[d].tokens);
          records[i] = build_slice(slices[i], docs, config.params, seeds, config.svd, &stats[i]);
          stats[i].corpus_id = id;
          std::string sigma;
          for (double s : stats[i].singular_values) sigma += (sigma.empty() ? "" : " ") + format_double(s);
          const std::scoped_lock lock(log_mutex);
          say("[" + name + "] tokens=" + std::to_string(slices[i].token_count) + " |V|=" +
              std::to_string(stats[i].vocab_size) + " cooc_nnz=" + std::to_string(stats[i].cooc_nnz) +
              " ppmi_nnz=" + std::to_string(stats[i].ppmi_nnz) + " sigma_head=[" + sigma +
              "] emotions=" + std::to_string(stats[i].emotions) + " (" + format_double(stats[i].seconds) + " s)");
        } catch (const StageError& e) {
          failures[i] = std::make_exception_ptr(StageError(e.stage(), Error(e.code(), e.detail(), e.subject()), name));
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), slices.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
    for (std::size_t i = 0; i < slices.size(); ++i) {
      auto receipt = stage("store", slice_name(id, slices[i]), [&] { return out.write_slice(id, std::move(*records[i])); });
      if (report) {
        report->receipts.push_back(receipt);
        report->slices.push_back(stats[i]);
      }
    }
  }
  return out;
}

BuildReport run_build(const PipelineConfig& config, const Logger& log) {
  BuildReport report;
  if (config.store.empty()) throw StageError("config", Error(ErrorCode::kInvalidArgument, "no store path"), "");
  const auto store = build_store(config, log, &report);
  const auto started = Clock::now();
  stage("store", config.store.string(), [&] { store.save(config.store); });
  if (log) log("[store] wrote " + config.store.string() + " (" + format_double(seconds_since(started)) + " s)");
  return report;
}

}  // namespace jeseme::pipeline
