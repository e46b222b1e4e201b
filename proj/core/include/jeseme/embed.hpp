#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jeseme/cooc.hpp"
#include "jeseme/corpus.hpp"

namespace jeseme::embed {

// Column-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SparseEntry {
  WordId column = 0;
  double value = 0.0;
};

// Compressed sparse rows with column indices sorted inside each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
            std::vector<SparseEntry> entries);
  // Zero values are dropped.
  static CsrMatrix from_dense(const DenseMatrix& dense);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const SparseEntry> row(std::size_t r) const {
    return {entries_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  double at(std::size_t r, std::size_t c) const;
  DenseMatrix to_dense() const;

  // this * x and this^T * x for a dense block x.
  DenseMatrix multiply(const DenseMatrix& x) const;
  DenseMatrix multiply_transposed(const DenseMatrix& x) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<SparseEntry> entries_;
};

// Positive PMI with context-distribution smoothing; only values > 0 stored.
class PpmiMatrix {
 public:
  PpmiMatrix() = default;
  PpmiMatrix(CsrMatrix matrix, double alpha) : matrix_(std::move(matrix)), alpha_(alpha) {}

  std::size_t vocab_size() const { return matrix_.rows(); }
  double alpha() const { return alpha_; }
  std::span<const SparseEntry> row(WordId w) const { return matrix_.row(static_cast<std::size_t>(w)); }
  double at(WordId w, WordId c) const { return matrix_.at(static_cast<std::size_t>(w), static_cast<std::size_t>(c)); }
  std::size_t nnz() const { return matrix_.nnz(); }
  const CsrMatrix& matrix() const { return matrix_; }

 private:
  CsrMatrix matrix_;
  double alpha_ = 1.0;
};

// PPMI(w,c) = max(0, log[P(w,c) / (P(w) * P_alpha(c))]) with
// P(w) = sum_c #(w,c) / total and P_alpha(c) = #(c)^alpha / sum_c' #(c')^alpha.
// Throws Error(kEmptyMatrix) when the counts are empty.
PpmiMatrix ppmi(const cooc::SparseCooc& counts, double alpha);

struct SvdOptions {
  std::uint64_t seed = 1;
  int oversampling = 10;
  // Subspace iteration runs at least min and at most max rounds; it stops
  // early once the top singular values move less than `tolerance`
  // (relative) between rounds.
  int min_power_iterations = 4;
  int max_power_iterations = 100;
  double tolerance = 1e-13;
};

struct TruncatedSvd {
  std::vector<double> singular_values;  // descending
  DenseMatrix u;                        // rows x d, orthonormal columns
  DenseMatrix v;                        // cols x d, orthonormal columns
  int power_iterations = 0;
};

// Randomized range finder plus subspace iteration. The largest-magnitude
// entry of every left singular vector is non-negative. Throws
// Error(kInvalidDimension) unless 1 <= d <= min(rows, cols).
TruncatedSvd randomized_svd(const CsrMatrix& matrix, int d, const SvdOptions& options = {});

// Dense per-slice word vectors, stored as 32-bit floats (the persisted form).
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(int slice_id, std::size_t dimension, std::vector<float> vectors,
                 std::vector<double> singular_values = {}, double eig_weight = 0.0,
                 std::uint64_t svd_seed = 0);

  int slice_id() const { return slice_id_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return dimension_ == 0 ? 0 : vectors_.size() / dimension_; }
  std::span<const float> vector(WordId w) const {
    return {vectors_.data() + static_cast<std::size_t>(w) * dimension_, dimension_};
  }
  double norm(WordId w) const { return norms_[static_cast<std::size_t>(w)]; }
  const std::vector<float>& data() const { return vectors_; }
  const std::vector<double>& singular_values() const { return singular_values_; }
  double eig_weight() const { return eig_weight_; }
  std::uint64_t svd_seed() const { return svd_seed_; }

 private:
  int slice_id_ = 0;
  std::size_t dimension_ = 0;
  std::vector<float> vectors_;
  std::vector<double> norms_;
  std::vector<double> singular_values_;
  double eig_weight_ = 0.0;
  std::uint64_t svd_seed_ = 0;
};

// vector(w) = row w of U_d * Sigma_d^p. `d` may exceed the matrix rank only
// up to vocab_size; missing components are zero.
EmbeddingModel truncated_svd(const PpmiMatrix& ppmi, int d, double eig_weight, std::uint64_t seed,
                             int slice_id = 0, const SvdOptions& options = {});

// u.v / (|u||v|), 0 when either norm is 0. Throws Error(kDimensionMismatch).
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

// Cosine of two words of the same model, using cached norms.
double word_cosine(const EmbeddingModel& model, WordId a, WordId b);

struct SimilarityPoint {
  int slice_id = 0;
  double cosine = 0.0;

  friend bool operator==(const SimilarityPoint&, const SimilarityPoint&) = default;
};

// One point per slice where both words have a vector.
struct SimilaritySeries {
  std::pair<std::string, std::string> word_pair;
  std::vector<SimilarityPoint> points;
};

struct Neighbor {
  WordId id = 0;
  double cosine = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// k highest-cosine words, descending, ties by word string.
std::vector<Neighbor> top_k_similar(WordId word, const corpus::Vocabulary& vocab,
                                    const EmbeddingModel& model, int k, bool exclude_self);
std::vector<cooc::ScoredWord> top_k_similar(std::string_view word, const corpus::Vocabulary& vocab,
                                            const EmbeddingModel& model, int k, bool exclude_self);

}  // namespace jeseme::embed
