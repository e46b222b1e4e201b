#include "jeseme/embed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "jeseme/error.hpp"
#include "linalg.hpp"

namespace jeseme::embed {
namespace {

template <typename T>
double dot_product(std::span<const T> u, std::span<const T> v) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  return sum;
}

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector lengths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  const double nu = std::sqrt(dot_product(u, u));
  const double nv = std::sqrt(dot_product(v, v));
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot_product(u, v) / (nu * nv), -1.0, 1.0);
}

bool by_column(const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; }

}  // namespace

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<SparseEntry> entries)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), entries_(std::move(entries)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != entries_.size()) {
    throw Error(ErrorCode::kConsistencyError, "malformed CSR row pointers");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw Error(ErrorCode::kConsistencyError, "CSR row pointers decrease");
    for (std::size_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
      const auto& e = entries_[i];
      if (e.column < 0 || static_cast<std::size_t>(e.column) >= cols_) {
        throw Error(ErrorCode::kConsistencyError, "CSR column out of range");
      }
      if (i > row_ptr_[r] && entries_[i - 1].column >= e.column) {
        throw Error(ErrorCode::kConsistencyError, "CSR columns must be strictly increasing per row");
      }
    }
  }
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& dense) {
  std::vector<std::size_t> row_ptr{0};
  std::vector<SparseEntry> entries;
  for (std::size_t r = 0; r < dense.rows(); ++r) {
    for (std::size_t c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) entries.push_back({static_cast<WordId>(c), dense(r, c)});
    }
    row_ptr.push_back(entries.size());
  }
  return CsrMatrix(dense.rows(), dense.cols(), std::move(row_ptr), std::move(entries));
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto entries = row(r);
  const SparseEntry probe{static_cast<WordId>(c), 0.0};
  auto it = std::lower_bound(entries.begin(), entries.end(), probe, by_column);
  return it != entries.end() && it->column == probe.column ? it->value : 0.0;
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix dense(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (const auto& e : row(r)) dense(r, static_cast<std::size_t>(e.column)) = e.value;
  }
  return dense;
}

DenseMatrix CsrMatrix::multiply(const DenseMatrix& x) const {
  if (x.rows() != cols_) throw Error(ErrorCode::kDimensionMismatch, "CSR multiply shape mismatch");
  DenseMatrix out(rows_, x.cols());
  for (std::size_t k = 0; k < x.cols(); ++k) {
    const auto src = x.col(k);
    auto dst = out.col(k);
    for (std::size_t r = 0; r < rows_; ++r) {
      double sum = 0.0;
      for (const auto& e : row(r)) sum += e.value * src[static_cast<std::size_t>(e.column)];
      dst[r] = sum;
    }
  }
  return out;
}

DenseMatrix CsrMatrix::multiply_transposed(const DenseMatrix& x) const {
  if (x.rows() != rows_) throw Error(ErrorCode::kDimensionMismatch, "CSR transposed multiply shape mismatch");
  DenseMatrix out(cols_, x.cols());
  for (std::size_t k = 0; k < x.cols(); ++k) {
    const auto src = x.col(k);
    auto dst = out.col(k);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double scale = src[r];
      if (scale == 0.0) continue;
      for (const auto& e : row(r)) dst[static_cast<std::size_t>(e.column)] += e.value * scale;
    }
  }
  return out;
}

PpmiMatrix ppmi(const cooc::SparseCooc& counts, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1]");
  if (counts.nnz() == 0 || !(counts.total_pairs() > 0.0)) {
    throw Error(ErrorCode::kEmptyMatrix, "co-occurrence matrix is empty");
  }
  const std::size_t n = counts.vocab_size();
  std::vector<double> row_sums(n, 0.0);
  std::vector<double> col_sums(n, 0.0);
  for (const auto& t : counts.triples()) {
    row_sums[static_cast<std::size_t>(t.target)] += t.count;
    col_sums[static_cast<std::size_t>(t.context)] += t.count;
  }
  std::vector<double> smoothed(n, 0.0);
  double smoothed_total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (col_sums[c] > 0.0) {
      smoothed[c] = alpha == 1.0 ? col_sums[c] : std::pow(col_sums[c], alpha);
      smoothed_total += smoothed[c];
    }
  }

  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<SparseEntry> entries;
  entries.reserve(counts.nnz());
  std::size_t t_index = 0;
  const auto& triples = counts.triples();
  for (std::size_t w = 0; w < n; ++w) {
    for (; t_index < triples.size() && static_cast<std::size_t>(triples[t_index].target) == w; ++t_index) {
      const auto& t = triples[t_index];
      const auto c = static_cast<std::size_t>(t.context);
      // P(w,c) / (P(w) P_a(c)) == #(w,c) * sum_c' #(c')^a / (#(w) * #(c)^a)
      const double ratio = (t.count * smoothed_total) / (row_sums[w] * smoothed[c]);
      const double value = std::log(ratio);
      if (value > 0.0) entries.push_back({t.context, value});
    }
    row_ptr[w + 1] = entries.size();
  }
  return PpmiMatrix(CsrMatrix(n, n, std::move(row_ptr), std::move(entries)), alpha);
}

TruncatedSvd randomized_svd(const CsrMatrix& matrix, int d, const SvdOptions& options) {
  const std::size_t smaller = std::min(matrix.rows(), matrix.cols());
  if (d < 1 || static_cast<std::size_t>(d) > smaller) {
    throw Error(ErrorCode::kInvalidDimension,
                "dimension " + std::to_string(d) + " outside [1, " + std::to_string(smaller) + "]");
  }
  const auto rank = static_cast<std::size_t>(d);
  const std::size_t width = std::min(rank + static_cast<std::size_t>(std::max(options.oversampling, 0)), smaller);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gaussian;
  DenseMatrix probe(matrix.cols(), width);
  for (std::size_t j = 0; j < width; ++j) {
    for (double& x : probe.col(j)) x = gaussian(rng);
  }

  DenseMatrix range = matrix.multiply(probe);  // Q
  detail::orthonormalize(range, rng);

  DenseMatrix corange;  // Q~ with Q^T A = R^T Q~^T
  detail::JacobiSvd small;
  std::vector<double> previous;
  int iteration = 0;
  while (true) {
    corange = matrix.multiply_transposed(range);
    const DenseMatrix r = detail::orthonormalize(corange, rng);
    small = detail::jacobi_svd(detail::transpose(r));

    bool converged = false;
    if (!previous.empty()) {
      const double scale = std::max(small.singular_values.front(), 1e-300);
      double change = 0.0;
      for (std::size_t j = 0; j < rank; ++j) {
        change = std::max(change, std::abs(small.singular_values[j] - previous[j]));
      }
      converged = change <= options.tolerance * scale;
    }
    if (width == smaller) converged = true;  // the range already spans the whole space
    if ((iteration >= options.min_power_iterations && converged) ||
        iteration >= options.max_power_iterations) {
      break;
    }
    previous.assign(small.singular_values.begin(), small.singular_values.begin() + static_cast<std::ptrdiff_t>(rank));
    range = matrix.multiply(corange);
    detail::orthonormalize(range, rng);
    ++iteration;
  }

  // A ~= (Q U_r) Sigma (Q~ V_r)^T
  const DenseMatrix u_full = detail::multiply(range, small.u);
  const DenseMatrix v_full = detail::multiply(corange, small.v);

  TruncatedSvd out;
  out.power_iterations = iteration;
  out.singular_values.assign(small.singular_values.begin(), small.singular_values.begin() + static_cast<std::ptrdiff_t>(rank));
  out.u = DenseMatrix(matrix.rows(), rank);
  out.v = DenseMatrix(matrix.cols(), rank);
  for (std::size_t j = 0; j < rank; ++j) {
    const auto u_src = u_full.col(j);
    const auto v_src = v_full.col(j);
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < u_src.size(); ++i) {
      if (std::abs(u_src[i]) > std::abs(u_src[pivot])) pivot = i;
    }
    const double sign = u_src[pivot] < 0.0 ? -1.0 : 1.0;
    auto u_dst = out.u.col(j);
    auto v_dst = out.v.col(j);
    for (std::size_t i = 0; i < u_src.size(); ++i) u_dst[i] = sign * u_src[i];
    for (std::size_t i = 0; i < v_src.size(); ++i) v_dst[i] = sign * v_src[i];
  }
  return out;
}

EmbeddingModel::EmbeddingModel(int slice_id, std::size_t dimension, std::vector<float> vectors,
                               std::vector<double> singular_values, double eig_weight, std::uint64_t svd_seed)
    : slice_id_(slice_id),
      dimension_(dimension),
      vectors_(std::move(vectors)),
      singular_values_(std::move(singular_values)),
      eig_weight_(eig_weight),
      svd_seed_(svd_seed) {
  if (dimension_ == 0 || vectors_.size() % dimension_ != 0) {
    throw Error(ErrorCode::kConsistencyError, "vector block is not a multiple of the dimension");
  }
  const std::size_t n = vectors_.size() / dimension_;
  norms_.resize(n);
  for (std::size_t w = 0; w < n; ++w) {
    const auto v = vector(static_cast<WordId>(w));
    for (float x : v) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kConsistencyError, "non-finite vector component");
    }
    norms_[w] = std::sqrt(dot_product(v, v));
  }
}

EmbeddingModel truncated_svd(const PpmiMatrix& ppmi, int d, double eig_weight, std::uint64_t seed,
                             int slice_id, const SvdOptions& options) {
  if (eig_weight < 0.0 || eig_weight > 1.0) throw Error(ErrorCode::kInvalidArgument, "eig_weight must lie in [0, 1]");
  const std::size_t n = ppmi.vocab_size();
  if (d < 1 || static_cast<std::size_t>(d) > n) {
    throw Error(ErrorCode::kInvalidDimension,
                "dimension " + std::to_string(d) + " outside [1, " + std::to_string(n) + "]");
  }
  SvdOptions opts = options;
  opts.seed = seed;
  const TruncatedSvd svd = randomized_svd(ppmi.matrix(), d, opts);

  const auto dim = static_cast<std::size_t>(d);
  const double largest = svd.singular_values.front();
  std::vector<double> weights(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double sigma = svd.singular_values[j];
    const bool zero = !(sigma > 1e-12 * largest);
    weights[j] = zero ? 0.0 : (eig_weight == 0.0 ? 1.0 : std::pow(sigma, eig_weight));
  }
  std::vector<float> vectors(n * dim);
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t j = 0; j < dim; ++j) vectors[w * dim + j] = static_cast<float>(svd.u(w, j) * weights[j]);
  }
  return EmbeddingModel(slice_id, dim, std::move(vectors), svd.singular_values, eig_weight, seed);
}

double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

double word_cosine(const EmbeddingModel& model, WordId a, WordId b) {
  const double na = model.norm(a);
  const double nb = model.norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot_product(model.vector(a), model.vector(b)) / (na * nb), -1.0, 1.0);
}

std::vector<Neighbor> top_k_similar(WordId word, const corpus::Vocabulary& vocab,
                                    const EmbeddingModel& model, int k, bool exclude_self) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (model.size() != vocab.size()) throw Error(ErrorCode::kConsistencyError, "model and vocabulary sizes differ");
  if (word < 0 || static_cast<std::size_t>(word) >= vocab.size()) {
    throw Error(ErrorCode::kUnknownWord, "word id " + std::to_string(word) + " out of range");
  }
  std::vector<Neighbor> all;
  all.reserve(vocab.size());
  for (std::size_t other = 0; other < vocab.size(); ++other) {
    const auto id = static_cast<WordId>(other);
    if (exclude_self && id == word) continue;
    all.push_back({id, word_cosine(model, word, id)});
  }
  const std::size_t keep = std::min(all.size(), static_cast<std::size_t>(k));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [&](const Neighbor& a, const Neighbor& b) {
                      return a.cosine != b.cosine ? a.cosine > b.cosine : vocab.word(a.id) < vocab.word(b.id);
                    });
  all.resize(keep);
  return all;
}

std::vector<cooc::ScoredWord> top_k_similar(std::string_view word, const corpus::Vocabulary& vocab,
                                            const EmbeddingModel& model, int k, bool exclude_self) {
  const auto id = vocab.id(word);
  if (!id) throw Error(ErrorCode::kUnknownWord, "'" + std::string(word) + "' not in vocabulary", std::string(word));
  std::vector<cooc::ScoredWord> out;
  for (const auto& n : top_k_similar(*id, vocab, model, k, exclude_self)) out.push_back({vocab.word(n.id), n.cosine});
  return out;
}

}  // namespace jeseme::embed
