#include "specexact/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "specexact/errors.hpp"

namespace specexact {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{}) {}

ComplexMatrix ComplexMatrix::from_rows(
    std::initializer_list<std::initializer_list<cplx>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  ComplexMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ArgumentError("from_rows: ragged row " + std::to_string(i));
    std::size_t j = 0;
    for (const auto& v : row) m(i, j++) = v;
    ++i;
  }
  if (!m.all_finite()) throw ArgumentError("from_rows: non-finite entry");
  return m;
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::initializer_list<cplx> diag) {
  return diagonal(std::span<const cplx>(diag.begin(), diag.size()));
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  return t;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix t(*this);
  for (auto& v : t.data_) v = std::conj(v);
  return t;
}

ComplexMatrix ComplexMatrix::leading(std::size_t r, std::size_t c) const {
  return block(0, 0, r, c);
}

ComplexMatrix ComplexMatrix::block(std::size_t r0, std::size_t c0, std::size_t r,
                                   std::size_t c) const {
  if (r0 + r > rows_ || c0 + c > cols_) throw DimensionError("block out of range");
  ComplexMatrix b(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void ComplexMatrix::set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
    throw DimensionError("set_block out of range");
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

ComplexMatrix ComplexMatrix::shifted(cplx z) const {
  if (!is_square()) throw DimensionError("shift of a non-square matrix");
  ComplexMatrix m(*this);
  for (std::size_t i = 0; i < rows_; ++i) m(i, i) -= z;
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double ComplexMatrix::frobenius_norm() const noexcept {
  double scale = 0.0, ssq = 1.0;
  for (const auto& v : data_) {
    for (double x : {v.real(), v.imag()}) {
      if (x == 0.0) continue;
      const double a = std::abs(x);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

double ComplexMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexMatrix::norm1() const noexcept {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double ComplexMatrix::norm_inf() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

bool ComplexMatrix::is_hermitian() const noexcept {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i; j < cols_; ++j)
      if ((*this)(i, j) != std::conj((*this)(j, i))) return false;
  return true;
}

bool ComplexMatrix::is_symmetric() const noexcept {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

std::size_t ComplexMatrix::lower_bandwidth() const noexcept {
  std::size_t kl = 0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < std::min(i, cols_); ++j)
      if ((*this)(i, j) != cplx{}) {
        kl = std::max(kl, i - j);
        break;
      }
  return kl;
}

std::size_t ComplexMatrix::upper_bandwidth() const noexcept {
  std::size_t ku = 0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = cols_; j-- > i + 1;)
      if ((*this)(i, j) != cplx{}) {
        ku = std::max(ku, j - i);
        break;
      }
  return ku;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("matrix sum: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_)
    throw DimensionError("matrix difference: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimension mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

std::vector<cplx> operator*(const ComplexMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw DimensionError("matrix-vector product: size mismatch");
  std::vector<cplx> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s{};
    auto r = a.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

double norm_bound(const ComplexMatrix& m) noexcept {
  return std::min(m.frobenius_norm(), std::sqrt(m.norm1() * m.norm_inf()));
}

double vector_norm(std::span<const cplx> x) noexcept {
  double scale = 0.0, ssq = 1.0;
  for (const auto& v : x) {
    for (double c : {v.real(), v.imag()}) {
      if (c == 0.0) continue;
      const double a = std::abs(c);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

}  // namespace specexact
