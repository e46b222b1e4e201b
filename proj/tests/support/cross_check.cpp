#include "cross_check.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "synthetic.hpp"

namespace jeseme::testing {
namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

using Rows = std::vector<std::vector<std::string>>;

Rows split_rows(const std::string& text) {
  Rows rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      fields.push_back(line.substr(start, tab - start));
    }
    fields.push_back(line.substr(start));
    rows.push_back(std::move(fields));
  }
  return rows;
}

// Expected rows with numbers kept as JSON values.
std::vector<std::vector<nlohmann::json>> expected_rows(const std::string& sub, const nlohmann::json& body) {
  std::vector<std::vector<nlohmann::json>> rows;
  if (sub == "similarity" || sub == "frequency") {
    for (const auto& curve : body.at("curves")) {
      for (const auto& p : curve.at("points")) rows.push_back({p.at("x"), p.at("y")});
    }
  } else if (sub == "emotion") {
    std::map<int, std::vector<nlohmann::json>> by_x;
    for (const auto& curve : body.at("curves")) {
      for (const auto& p : curve.at("points")) by_x[p.at("x").get<int>()].push_back(p.at("y"));
    }
    for (auto& [x, ys] : by_x) {
      std::vector<nlohmann::json> row{x};
      row.insert(row.end(), ys.begin(), ys.end());
      rows.push_back(std::move(row));
    }
  } else if (sub == "context") {
    if (body.contains("contexts")) {
      for (const auto& slice : body.at("contexts")) {
        for (const auto& item : slice.at("items")) rows.push_back({slice.at("x"), item.at("word"), item.at("score")});
      }
    }
  } else if (sub == "neighbors") {
    if (body.contains("neighbors")) {
      for (const auto& item : body.at("neighbors")) rows.push_back({item.at("word"), item.at("score")});
    }
  }
  return rows;
}

}  // namespace

ProcessResult run_process(const std::string& program, const std::vector<std::string>& args) {
  static std::mt19937_64 rng(std::random_device{}());
  const auto dir = std::filesystem::temp_directory_path();
  const auto tag = std::to_string(rng());
  const auto out_path = dir / ("jeseme_out_" + tag);
  const auto err_path = dir / ("jeseme_err_" + tag);
  std::string command = shell_quote(program);
  for (const auto& a : args) command += " " + shell_quote(a);
  command += " >" + shell_quote(out_path.string()) + " 2>" + shell_quote(err_path.string()) + " </dev/null";
  const int status = std::system(command.c_str());
  ProcessResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return result;
}

std::string compare_cli_to_json(const std::string& subcommand, const std::string& cli_out,
                                const nlohmann::json& body) {
  const auto got = split_rows(cli_out);
  const auto want = expected_rows(subcommand, body);
  if (got.size() != want.size()) {
    return "row count " + std::to_string(got.size()) + " != " + std::to_string(want.size());
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].size() != want[i].size()) return "field count differs in row " + std::to_string(i);
    for (std::size_t j = 0; j < got[i].size(); ++j) {
      const auto& w = want[i][j];
      const std::string& g = got[i][j];
      bool same = false;
      if (w.is_string()) {
        same = g == w.get<std::string>();
      } else if (w.is_number_integer()) {
        same = g == std::to_string(w.get<long long>());
      } else {
        char* end = nullptr;
        const double parsed = std::strtod(g.c_str(), &end);
        same = end != g.c_str() && *end == '\0' && parsed == w.get<double>();
      }
      if (!same) return "row " + std::to_string(i) + " field " + std::to_string(j) + ": '" + g + "' vs " + w.dump();
    }
  }
  return {};
}

}  // namespace jeseme::testing
