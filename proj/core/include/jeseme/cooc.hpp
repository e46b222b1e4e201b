#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jeseme/corpus.hpp"

namespace jeseme {

namespace embed {
class PpmiMatrix;
}

namespace cooc {

struct CoocEntry {
  WordId target = 0;
  WordId context = 0;
  double count = 0.0;

  friend bool operator==(const CoocEntry&, const CoocEntry&) = default;
};

// Co-occurrence counts #(w, c) as a target-major sorted triple list.
class SparseCooc {
 public:
  SparseCooc() = default;

  // Validates ids, positivity and uniqueness; sorts target-major. Symmetry is
  // not required here (see is_symmetric) so that arbitrary count matrices can
  // feed PPMI.
  static SparseCooc from_triples(std::size_t vocab_size, std::vector<CoocEntry> triples);

  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<CoocEntry>& triples() const { return triples_; }
  std::size_t nnz() const { return triples_.size(); }
  double total_pairs() const { return total_; }

  // 0 when the pair was never observed.
  double count(WordId target, WordId context) const;
  bool is_symmetric() const;

 private:
  std::size_t vocab_size_ = 0;
  std::vector<CoocEntry> triples_;
  double total_ = 0.0;
};

// Symmetric constant-weight window counting. For each position i and offset
// 1 <= d <= window inside the same document, both (w_i, w_{i+d}) and
// (w_{i+d}, w_i) are incremented. Negative ids are skipped but keep their
// position.
SparseCooc count_cooccurrences(std::span<const std::vector<WordId>> documents,
                               std::size_t vocab_size, int window);

// count(w) / token_count for every vocabulary word. Throws Error(kEmptySlice).
std::map<std::string, double> relative_frequency(const corpus::Vocabulary& vocab,
                                                 const corpus::TimeSlice& slice);

struct ScoredWord {
  std::string word;
  double score = 0.0;

  friend bool operator==(const ScoredWord&, const ScoredWord&) = default;
};

// Top-k contexts of `word` by PPMI, descending, ties lexicographic. Returns
// fewer than k when the row has fewer positive entries. Throws
// Error(kUnknownWord).
std::vector<ScoredWord> typical_contexts(std::string_view word, const corpus::Vocabulary& vocab,
                                         const embed::PpmiMatrix& ppmi, int k);

}  // namespace cooc
}  // namespace jeseme
