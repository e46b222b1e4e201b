#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "jeseme/http_server.hpp"
#include "jeseme/pipeline.hpp"
#include "jeseme/query.hpp"

namespace {

using namespace jeseme;

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct BuildFlags {
  std::string config;
  std::string store;
  std::string corpus;
  std::optional<int> workers, dimension, window, neighbors, contexts;
  std::optional<std::int64_t> min_count;
  std::optional<std::uint64_t> svd_seed;
  std::optional<double> alpha, eig_weight, min_seed_sim;
  bool quiet = false;
};

int cmd_build(const BuildFlags& f) {
  try {
    auto config = pipeline::PipelineConfig::load(f.config);
    if (!f.store.empty()) config.store = f.store;
    if (f.workers) config.workers = *f.workers;
    auto& p = config.params;
    if (f.dimension) p.dimension = *f.dimension;
    if (f.window) p.window = *f.window;
    if (f.neighbors) p.neighbors = *f.neighbors;
    if (f.contexts) p.contexts = *f.contexts;
    if (f.min_count) p.min_count = *f.min_count;
    if (f.svd_seed) p.svd_seed = *f.svd_seed;
    if (f.alpha) p.alpha = *f.alpha;
    if (f.eig_weight) p.eig_weight = *f.eig_weight;
    if (f.min_seed_sim) p.min_seed_sim = *f.min_seed_sim;
    config.svd.seed = p.svd_seed;
    if (!f.corpus.empty()) {
      std::erase_if(config.corpora, [&](const pipeline::CorpusSource& s) {
        return corpus::CorpusManifest::load(s.manifest).corpus_id != f.corpus;
      });
      if (config.corpora.empty()) throw Error(ErrorCode::kUnknownCorpus, "no configured corpus '" + f.corpus + "'", f.corpus);
    }
    pipeline::Logger log;
    if (!f.quiet) log = [](const std::string& line) { std::cout << line << std::endl; };
    const auto report = pipeline::run_build(config, log);
    if (!f.quiet) std::cout << "built " << report.receipts.size() << " slices into " << config.store.string() << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "jeseme build: " << e.what() << '\n';
    return 2;
  }
}

std::shared_ptr<const store::ModelStore> open_store(const std::string& path) {
  return std::make_shared<const store::ModelStore>(store::ModelStore::load(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diachronic word embeddings, similarity and emotion explorer"};
  app.require_subcommand(1);

  BuildFlags build;
  auto* build_cmd = app.add_subcommand("build", "Run the processing pipeline and write a store file");
  build_cmd->add_option("--config", build.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--store", build.store, "Output store path (overrides config)");
  build_cmd->add_option("--corpus", build.corpus, "Only build the corpus with this id");
  build_cmd->add_option("--workers", build.workers, "Slices processed in parallel");
  build_cmd->add_option("--dimension", build.dimension, "Embedding dimension d");
  build_cmd->add_option("--window", build.window, "Symmetric co-occurrence window");
  build_cmd->add_option("--min-count", build.min_count, "Minimum word count per slice");
  build_cmd->add_option("--alpha", build.alpha, "Context distribution smoothing");
  build_cmd->add_option("--eig-weight", build.eig_weight, "Singular value exponent p");
  build_cmd->add_option("--svd-seed", build.svd_seed, "Random seed of the SVD");
  build_cmd->add_option("--neighbors", build.neighbors, "Cached neighbors per word (K)");
  build_cmd->add_option("--contexts", build.contexts, "Cached contexts per word (K_c)");
  build_cmd->add_option("--min-seed-sim", build.min_seed_sim, "Seed similarity threshold");
  build_cmd->add_flag("--quiet", build.quiet, "Suppress stage logs");

  std::string serve_store;
  service::ServerConfig server_config;
  std::string static_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a store over the REST API");
  serve_cmd->add_option("--store", serve_store, "Store file")->required()->envname("JESEME_STORE");
  serve_cmd->add_option("--host", server_config.host, "Bind address")->envname("JESEME_HOST")->capture_default_str();
  serve_cmd->add_option("--port", server_config.port, "Port (0 picks a free one)")
      ->envname("JESEME_PORT")
      ->capture_default_str();
  serve_cmd->add_option("--static", static_dir, "Directory of UI assets mounted at /");

  std::string query_store;
  std::string scale = "raw";
  std::string sub;
  query::QueryRequest request;
  std::optional<int> k;
  auto* query_cmd = app.add_subcommand("query", "Answer one query from a store file");
  query_cmd->add_option("--store", query_store, "Store file")->required()->envname("JESEME_STORE");
  query_cmd->add_option("--corpus", request.corpus, "Corpus id")->required();
  query_cmd->add_option("--scale", scale, "Emotion scale: raw or zscored")->check(CLI::IsMember({"raw", "zscored"}));
  query_cmd->add_option("-k", k, "Result count for context/neighbors");
  query_cmd->add_option("subcommand", sub, "similarity | emotion | frequency | context | neighbors")
      ->required()
      ->check(CLI::IsMember({"similarity", "emotion", "frequency", "context", "neighbors"}));
  query_cmd->add_option("words", request.words, "Query word(s)")->required();

  std::string table_store, table_name, table_file;
  auto* export_cmd = app.add_subcommand("export", "Write one store table as CSV");
  export_cmd->add_option("--store", table_store, "Store file")->required();
  export_cmd->add_option("--table", table_name, "Table name")->required();
  export_cmd->add_option("--out", table_file, "Output file (default stdout)");
  auto* import_cmd = app.add_subcommand("import", "Replace one store table from CSV and rewrite the store");
  import_cmd->add_option("--store", table_store, "Store file")->required();
  import_cmd->add_option("--table", table_name, "Table name")->required();
  import_cmd->add_option("--in", table_file, "CSV file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*build_cmd) return cmd_build(build);

  if (*query_cmd) {
    request.subcommand = query::parse_subcommand(sub);
    request.scale = service::parse_scale(scale);
    request.k = k;
    const auto outcome = query::run_query(query_store, request);
    std::cout << outcome.out;
    std::cerr << outcome.err;
    return outcome.exit_code;
  }

  if (*serve_cmd) {
    try {
      if (!static_dir.empty()) server_config.static_dir = static_dir;
      auto api = std::make_shared<const service::Api>(open_store(serve_store));
      service::HttpServer server(api, server_config);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving " << serve_store << " on http://" << server_config.host << ':' << port << std::endl;
      server.run();
      g_server = nullptr;
      return 0;
    } catch (const Error& e) {
      std::cerr << "jeseme serve: " << e.what() << '\n';
      return 2;
    }
  }

  try {
    const auto table = store::parse_table(table_name);
    if (*export_cmd) {
      const auto loaded = store::ModelStore::load(table_store);
      if (table_file.empty()) {
        loaded.export_csv(table, std::cout);
      } else {
        std::ofstream out(table_file, std::ios::binary);
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + table_file, table_file);
        loaded.export_csv(table, out);
      }
      return 0;
    }
    auto loaded = store::ModelStore::load(table_store);
    std::ifstream in(table_file, std::ios::binary);
    loaded.import_csv(table, in);
    loaded.save(table_store);
    return 0;
  } catch (const Error& e) {
    std::cerr << "jeseme " << (*export_cmd ? "export" : "import") << ": " << e.what() << '\n';
    return 2;
  }
}
