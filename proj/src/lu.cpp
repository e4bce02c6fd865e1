#include <algorithm>
#include <cmath>
#include <limits>

#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"

namespace specexact {

LuFactor::LuFactor(const ComplexMatrix& m) : LuFactor(m, cplx{}) {}

LuFactor::LuFactor(const ComplexMatrix& m, cplx shift) {
  if (!m.is_square()) throw DimensionError("LU of a non-square matrix");
  factor(m, shift, m.lower_bandwidth(), m.upper_bandwidth());
}

LuFactor::LuFactor(const ComplexMatrix& m, cplx shift, std::size_t kl, std::size_t ku) {
  if (!m.is_square()) throw DimensionError("LU of a non-square matrix");
  factor(m, shift, kl, ku);
}

void LuFactor::factor(const ComplexMatrix& m, cplx shift, std::size_t kl, std::size_t ku) {
  n_ = m.rows();
  if (n_ == 0) throw DimensionError("LU of an empty matrix");
  dense_ = !detail::band_storage_pays(n_, kl, ku);
  if (dense_) {
    kl_ = n_ - 1;
    ku_ = n_ - 1;
    width_ = n_;
    lu_.assign(m.data().begin(), m.data().end());
    for (std::size_t i = 0; i < n_; ++i) lu_[i * n_ + i] -= shift;
  } else {
    kl_ = kl;
    ku_ = kl + ku;
    width_ = kl_ + ku_ + 1;
    lu_.assign(n_ * width_, cplx{});
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i > kl ? i - kl : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku);
      for (std::size_t j = j0; j <= j1; ++j) u(i, j) = m(i, j);
      u(i, i) -= shift;
    }
  }
  lower_.assign(n_ * std::max<std::size_t>(kl_, 1), cplx{});
  pivots_.resize(n_);
  min_pivot_ = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t r_end = std::min(n_ - 1, k + kl_);
    std::size_t p = k;
    double best = std::abs(u(k, k));
    for (std::size_t i = k + 1; i <= r_end; ++i) {
      const double a = std::abs(u(i, k));
      if (a > best) {
        best = a;
        p = i;
      }
    }
    pivots_[k] = p;
    const std::size_t c_end = std::min(n_ - 1, k + ku_);
    if (p != k)
      for (std::size_t j = k; j <= c_end; ++j) std::swap(u(k, j), u(p, j));
    const cplx piv = u(k, k);
    min_pivot_ = std::min(min_pivot_, std::abs(piv));
    if (piv == cplx{}) {
      singular_ = true;
      continue;
    }
    for (std::size_t i = k + 1; i <= r_end; ++i) {
      const cplx l = u(i, k) / piv;
      lower_[k * kl_ + (i - k - 1)] = l;
      if (l == cplx{}) continue;
      u(i, k) = 0.0;
      for (std::size_t j = k + 1; j <= c_end; ++j) u(i, j) -= l * u(k, j);
    }
  }
}

std::size_t LuFactor::last_col(std::size_t i) const noexcept {
  return std::min(n_ - 1, i + ku_);
}

std::vector<cplx> LuFactor::solve(std::span<const cplx> b) const {
  if (b.size() != n_) throw DimensionError("LU solve: right-hand side size mismatch");
  if (singular_) throw SingularityError("LU solve: exactly singular matrix", 0.0);
  std::vector<cplx> x(b.begin(), b.end());
  for (std::size_t k = 0; k < n_; ++k) {
    if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
    const cplx xk = x[k];
    if (xk == cplx{}) continue;
    const std::size_t r_end = std::min(n_ - 1, k + kl_);
    for (std::size_t i = k + 1; i <= r_end; ++i) x[i] -= lower_[k * kl_ + (i - k - 1)] * xk;
  }
  for (std::size_t i = n_; i-- > 0;) {
    cplx s = x[i];
    const std::size_t c_end = last_col(i);
    for (std::size_t j = i + 1; j <= c_end; ++j) s -= u(i, j) * x[j];
    x[i] = s / u(i, i);
  }
  return x;
}

std::vector<cplx> LuFactor::solve_adjoint(std::span<const cplx> b) const {
  if (b.size() != n_) throw DimensionError("LU solve: right-hand side size mismatch");
  if (singular_) throw SingularityError("LU solve: exactly singular matrix", 0.0);
  std::vector<cplx> y(b.begin(), b.end());
  // U^H w = b
  for (std::size_t i = 0; i < n_; ++i) {
    cplx s = y[i];
    const std::size_t j0 = i > ku_ ? i - ku_ : 0;
    for (std::size_t j = j0; j < i; ++j) s -= std::conj(u(j, i)) * y[j];
    y[i] = s / std::conj(u(i, i));
  }
  // y = P_0 M_0^H ... P_{n-1} M_{n-1}^H w
  for (std::size_t k = n_; k-- > 0;) {
    const std::size_t r_end = std::min(n_ - 1, k + kl_);
    cplx s{};
    for (std::size_t i = k + 1; i <= r_end; ++i) s += std::conj(lower_[k * kl_ + (i - k - 1)]) * y[i];
    y[k] -= s;
    if (pivots_[k] != k) std::swap(y[k], y[pivots_[k]]);
  }
  return y;
}

ComplexMatrix LuFactor::solve(const ComplexMatrix& b) const {
  if (b.rows() != n_) throw DimensionError("LU solve: right-hand side row mismatch");
  ComplexMatrix x(b.rows(), b.cols());
  std::vector<cplx> col(n_);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n_; ++i) col[i] = b(i, j);
    auto sol = solve(col);
    for (std::size_t i = 0; i < n_; ++i) x(i, j) = sol[i];
  }
  return x;
}

ComplexMatrix solve(const ComplexMatrix& m, const ComplexMatrix& b) {
  if (!m.is_square()) throw DimensionError("solve: matrix is not square");
  if (b.rows() != m.rows()) throw DimensionError("solve: right-hand side row mismatch");
  LuFactor lu(m);
  const double tol = 1e-14 * norm_bound(m);
  if (lu.exactly_singular() || lu.min_abs_pivot() < tol)
    throw SingularityError("solve: numerically singular matrix, pivot " +
                               std::to_string(lu.exactly_singular() ? 0.0 : lu.min_abs_pivot()),
                           lu.exactly_singular() ? 0.0 : lu.min_abs_pivot());
  return lu.solve(b);
}

}  // namespace specexact
