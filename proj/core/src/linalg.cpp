#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jeseme/error.hpp"

namespace jeseme::embed::detail {
namespace {

constexpr double kCollapseRatio = 1e-12;
constexpr double kJacobiEpsilon = 1e-15;
constexpr int kMaxJacobiSweeps = 80;

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Projects column j of `q` against columns [0, j) twice; accumulates the
// coefficients into `coeffs` when given.
void project_out(DenseMatrix& q, std::size_t j, std::vector<double>* coeffs) {
  auto target = q.col(j);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < j; ++i) {
      const auto basis = q.col(i);
      const double c = dot(basis, target);
      for (std::size_t r = 0; r < target.size(); ++r) target[r] -= c * basis[r];
      if (coeffs != nullptr) (*coeffs)[i] += c;
    }
  }
}

}  // namespace

DenseMatrix orthonormalize(DenseMatrix& block, std::mt19937_64& rng) {
  const std::size_t m = block.rows();
  const std::size_t n = block.cols();
  if (n > m) throw Error(ErrorCode::kInvalidDimension, "cannot orthonormalize more columns than rows");
  DenseMatrix r(n, n);
  std::normal_distribution<double> gaussian;
  for (std::size_t j = 0; j < n; ++j) {
    const double original = norm(block.col(j));
    std::vector<double> coeffs(j, 0.0);
    project_out(block, j, &coeffs);
    for (std::size_t i = 0; i < j; ++i) r(i, j) = coeffs[i];
    double remaining = norm(block.col(j));
    if (original > 0.0 && remaining > kCollapseRatio * original) {
      r(j, j) = remaining;
    } else {
      r(j, j) = 0.0;
      do {
        for (double& x : block.col(j)) x = gaussian(rng);
        project_out(block, j, nullptr);
        remaining = norm(block.col(j));
      } while (remaining < 1e-8);
    }
    for (double& x : block.col(j)) x /= remaining;
  }
  return r;
}

JacobiSvd jacobi_svd(DenseMatrix x) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (n > m) throw Error(ErrorCode::kInvalidDimension, "jacobi_svd expects rows >= cols");

  DenseMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto xp = x.col(p);
        auto xq = x.col(q);
        const double alpha = dot(xp, xp);
        const double beta = dot(xq, xq);
        const double gamma = dot(xp, xq);
        if (gamma == 0.0 || std::abs(gamma) <= kJacobiEpsilon * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double a = xp[i];
          const double b = xq[i];
          xp[i] = c * a - s * b;
          xq[i] = s * a + c * b;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double a = vp[i];
          const double b = vq[i];
          vp[i] = c * a - s * b;
          vq[i] = s * a + c * b;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm(x.col(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  JacobiSvd out;
  out.singular_values.resize(n);
  out.u = DenseMatrix(m, n);
  out.v = DenseMatrix(n, n);
  const double largest = n == 0 ? 0.0 : sigma[order[0]];
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.singular_values[k] = sigma[src];
    std::copy(v.col(src).begin(), v.col(src).end(), out.v.col(k).begin());
    if (sigma[src] > 0.0 && sigma[src] > 1e-14 * largest) {
      auto dst = out.u.col(k);
      for (std::size_t i = 0; i < m; ++i) dst[i] = x(i, src) / sigma[src];
      filled[k] = true;
    }
  }
  // Complete U for (numerically) zero singular values with canonical
  // directions orthogonal to the filled columns.
  std::size_t next_axis = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (filled[k]) continue;
    while (true) {
      auto col = out.u.col(k);
      std::fill(col.begin(), col.end(), 0.0);
      col[next_axis++ % m] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
          if (!filled[i]) continue;
          const auto basis = out.u.col(i);
          const double c = dot(basis, col);
          for (std::size_t r = 0; r < m; ++r) col[r] -= c * basis[r];
        }
      }
      const double len = norm(col);
      if (len > 1e-6) {
        for (double& value : col) value /= len;
        filled[k] = true;
        break;
      }
    }
  }
  return out;
}

DenseMatrix transpose_multiply(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < a.cols(); ++i) out(i, j) = dot(a.col(i), b.col(j));
  }
  return out;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto dst = out.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double scale = b(k, j);
      if (scale == 0.0) continue;
      const auto src = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) dst[i] += scale * src[i];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t i = 0; i < a.rows(); ++i) out(j, i) = a(i, j);
  }
  return out;
}

}  // namespace jeseme::embed::detail
