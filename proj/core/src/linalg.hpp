#pragma once

#include <random>
#include <vector>

#include "jeseme/embed.hpp"

namespace jeseme::embed::detail {

// Orthonormalizes the columns of `block` in place (classical Gram-Schmidt
// with one reorthogonalization pass) and returns R with block_in = Q * R.
// Columns that collapse numerically get R(j,j) = 0 and are replaced by a
// random direction orthogonal to the previous ones, so Q always has
// orthonormal columns.
DenseMatrix orthonormalize(DenseMatrix& block, std::mt19937_64& rng);

struct JacobiSvd {
  std::vector<double> singular_values;  // descending
  DenseMatrix u;                        // m x n, orthonormal (completed for zero singular values)
  DenseMatrix v;                        // n x n, orthogonal
};

// One-sided (Hestenes) Jacobi SVD of a dense m x n matrix with m >= n.
JacobiSvd jacobi_svd(DenseMatrix x);

// a^T * b
DenseMatrix transpose_multiply(const DenseMatrix& a, const DenseMatrix& b);
// a * b
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

}  // namespace jeseme::embed::detail
