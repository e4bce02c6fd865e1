#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace specexact {

using cplx = std::complex<double>;

// Dense complex matrix, row-major, 0-based storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);

  // Throws ArgumentError on ragged rows or non-finite entries.
  static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);
  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const cplx> diag);
  static ComplexMatrix diagonal(std::initializer_list<cplx> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<cplx> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conjugate() const;

  // Leading r x c block.
  ComplexMatrix leading(std::size_t r, std::size_t c) const;
  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t r, std::size_t c) const;
  void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& b);

  // this - z I
  ComplexMatrix shifted(cplx z) const;

  bool all_finite() const noexcept;
  double frobenius_norm() const noexcept;
  double max_abs() const noexcept;
  double norm1() const noexcept;    // max column sum
  double norm_inf() const noexcept; // max row sum

  bool is_hermitian() const noexcept;  // exact
  bool is_symmetric() const noexcept;  // exact, M == M^T

  // Exact lower/upper bandwidth of the nonzero pattern.
  std::size_t lower_bandwidth() const noexcept;
  std::size_t upper_bandwidth() const noexcept;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
std::vector<cplx> operator*(const ComplexMatrix& a, std::span<const cplx> x);

// Cheap upper bound of the spectral norm: min(Frobenius, sqrt(|M|_1 |M|_inf)).
double norm_bound(const ComplexMatrix& m) noexcept;

double vector_norm(std::span<const cplx> x) noexcept;

}  // namespace specexact
