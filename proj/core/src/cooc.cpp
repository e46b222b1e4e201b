#include "jeseme/cooc.hpp"

#include <algorithm>
#include <unordered_map>

#include "jeseme/embed.hpp"
#include "jeseme/error.hpp"

namespace jeseme::cooc {
namespace {

std::uint64_t pair_key(WordId target, WordId context) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(target)) << 32) |
         static_cast<std::uint32_t>(context);
}

}  // namespace

SparseCooc SparseCooc::from_triples(std::size_t vocab_size, std::vector<CoocEntry> triples) {
  std::sort(triples.begin(), triples.end(), [](const CoocEntry& a, const CoocEntry& b) {
    return a.target != b.target ? a.target < b.target : a.context < b.context;
  });
  SparseCooc out;
  out.vocab_size_ = vocab_size;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    if (t.target < 0 || t.context < 0 || static_cast<std::size_t>(t.target) >= vocab_size ||
        static_cast<std::size_t>(t.context) >= vocab_size) {
      throw Error(ErrorCode::kConsistencyError, "co-occurrence id out of range");
    }
    if (!(t.count > 0.0)) throw Error(ErrorCode::kConsistencyError, "co-occurrence counts must be positive");
    if (i > 0 && triples[i - 1].target == t.target && triples[i - 1].context == t.context) {
      throw Error(ErrorCode::kConsistencyError, "duplicate co-occurrence pair");
    }
    out.total_ += t.count;
  }
  out.triples_ = std::move(triples);
  return out;
}

double SparseCooc::count(WordId target, WordId context) const {
  const CoocEntry probe{target, context, 0.0};
  auto it = std::lower_bound(triples_.begin(), triples_.end(), probe, [](const CoocEntry& a, const CoocEntry& b) {
    return a.target != b.target ? a.target < b.target : a.context < b.context;
  });
  if (it != triples_.end() && it->target == target && it->context == context) return it->count;
  return 0.0;
}

bool SparseCooc::is_symmetric() const {
  return std::all_of(triples_.begin(), triples_.end(),
                     [&](const CoocEntry& t) { return count(t.context, t.target) == t.count; });
}

SparseCooc count_cooccurrences(std::span<const std::vector<WordId>> documents,
                               std::size_t vocab_size, int window) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "window must be >= 1");
  std::unordered_map<std::uint64_t, std::int64_t> counts;
  const auto w = static_cast<std::size_t>(window);
  for (const auto& doc : documents) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (doc[i] < 0) continue;
      const std::size_t last = std::min(doc.size(), i + w + 1);
      for (std::size_t j = i + 1; j < last; ++j) {
        if (doc[j] < 0) continue;
        ++counts[pair_key(doc[i], doc[j])];
        ++counts[pair_key(doc[j], doc[i])];
      }
    }
  }
  std::vector<CoocEntry> triples;
  triples.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    triples.push_back({static_cast<WordId>(key >> 32), static_cast<WordId>(key & 0xffffffffu),
                       static_cast<double>(count)});
  }
  return SparseCooc::from_triples(vocab_size, std::move(triples));
}

std::map<std::string, double> relative_frequency(const corpus::Vocabulary& vocab,
                                                 const corpus::TimeSlice& slice) {
  if (slice.token_count <= 0) {
    throw Error(ErrorCode::kEmptySlice, "slice " + std::to_string(slice.slice_id) + " has no tokens");
  }
  std::map<std::string, double> freq;
  const auto total = static_cast<double>(slice.token_count);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    freq.emplace(vocab.words()[i], static_cast<double>(vocab.counts()[i]) / total);
  }
  return freq;
}

std::vector<ScoredWord> typical_contexts(std::string_view word, const corpus::Vocabulary& vocab,
                                         const embed::PpmiMatrix& ppmi, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto id = vocab.id(word);
  if (!id) throw Error(ErrorCode::kUnknownWord, "'" + std::string(word) + "' not in vocabulary", std::string(word));

  std::vector<ScoredWord> row;
  for (const auto& entry : ppmi.row(*id)) row.push_back({vocab.word(entry.column), entry.value});
  const auto by_score = [](const ScoredWord& a, const ScoredWord& b) {
    return a.score != b.score ? a.score > b.score : a.word < b.word;
  };
  const std::size_t keep = std::min(row.size(), static_cast<std::size_t>(k));
  std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end(), by_score);
  row.resize(keep);
  return row;
}

}  // namespace jeseme::cooc
