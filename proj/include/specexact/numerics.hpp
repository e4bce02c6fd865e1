#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "specexact/matrix.hpp"

namespace specexact {

struct EigenCluster {
  cplx center;
  double radius = 0.0;                // max distance of a member from the center
  std::vector<std::size_t> members;   // indices into EigenDecomposition::eigenvalues
  std::size_t size() const noexcept { return members.size(); }
};

enum class ResidualKind {
  kEigenvector,         // |Mv - lambda v| / |v| from inverse iteration
  kBackwardErrorProxy,  // n * eps * |M|, declared when eigenvectors are too costly
};

struct EigenDecomposition {
  // Counted with algebraic multiplicity, sorted lexicographically by (Re, Im).
  std::vector<cplx> eigenvalues;
  std::vector<EigenCluster> clusters;
  std::vector<double> residuals;
  ResidualKind residual_kind = ResidualKind::kEigenvector;
  double cluster_radius = 0.0;
  double norm = 0.0;  // norm_bound of the input
  // Column k pairs with eigenvalues[k]; present only when requested and computed.
  std::optional<ComplexMatrix> eigenvectors;
};

struct EigOptions {
  bool residuals = true;
  bool eigenvectors = false;
};

// Dense eigensolve. Hermitian input goes through Householder tridiagonalization
// and implicit QL; complex-symmetric tridiagonal input through complex QL; the
// rest through balancing, Hessenberg reduction and shifted QR.
// Throws DimensionError for non-square input and ConvergenceError past
// 40 * n QR iterations.
EigenDecomposition eig_dense(const ComplexMatrix& m, const EigOptions& opts = {});

// Eigenvalues only (no residuals), sorted like eig_dense.
std::vector<cplx> eigenvalues(const ComplexMatrix& m);

// Default multiplicity radius: max(1e-8 |M|, 1e-10).
double multiplicity_radius(double norm) noexcept;

// Single-linkage clustering of a lexicographically sorted list.
std::vector<EigenCluster> cluster_eigenvalues(std::span<const cplx> sorted, double radius);

// All singular values, descending (one-sided Jacobi).
std::vector<double> singular_values(const ComplexMatrix& m);

double sigma_min(const ComplexMatrix& m);
double op_norm(const ComplexMatrix& m);

// X with M X = B; partial pivoting. SingularityError when a pivot falls
// below 1e-14 |M|.
ComplexMatrix solve(const ComplexMatrix& m, const ComplexMatrix& b);

namespace detail {
// Banded elimination costs about n (kl + 1)(2 kl + ku + 1); dense about n^3 / 3.
inline bool band_storage_pays(std::size_t n, std::size_t kl, std::size_t ku) noexcept {
  return (kl + 1) * (2 * kl + ku + 1) * 6 < n * n;
}
}  // namespace detail

// LU with partial pivoting. Uses band storage when the nonzero pattern makes
// it cheaper than the dense factorization.
class LuFactor {
 public:
  explicit LuFactor(const ComplexMatrix& m);
  // Factors m - shift I.
  LuFactor(const ComplexMatrix& m, cplx shift);
  // As above with the bandwidths of m already known (no pattern scan).
  LuFactor(const ComplexMatrix& m, cplx shift, std::size_t kl, std::size_t ku);

  std::size_t dim() const noexcept { return n_; }
  bool banded() const noexcept { return !dense_; }
  bool exactly_singular() const noexcept { return singular_; }
  double min_abs_pivot() const noexcept { return min_pivot_; }

  std::vector<cplx> solve(std::span<const cplx> b) const;
  std::vector<cplx> solve_adjoint(std::span<const cplx> b) const;
  ComplexMatrix solve(const ComplexMatrix& b) const;

 private:
  std::size_t at(std::size_t i, std::size_t j) const noexcept {
    return dense_ ? i * n_ + j : i * width_ + (j + kl_ - i);
  }
  cplx& u(std::size_t i, std::size_t j) { return lu_[at(i, j)]; }
  const cplx& u(std::size_t i, std::size_t j) const { return lu_[at(i, j)]; }
  std::size_t last_col(std::size_t i) const noexcept;
  void factor(const ComplexMatrix& m, cplx shift, std::size_t kl, std::size_t ku);

  std::size_t n_ = 0;
  std::size_t kl_ = 0;     // lower bandwidth
  std::size_t ku_ = 0;     // upper bandwidth of U after pivoting (kl + ku of input)
  std::size_t width_ = 0;
  bool dense_ = true;
  bool singular_ = false;
  double min_pivot_ = 0.0;
  std::vector<cplx> lu_;
  std::vector<cplx> lower_;          // multipliers, kl_ per step
  std::vector<std::size_t> pivots_;
};

// Largest singular value of a linear map given by its action and adjoint
// action (Golub-Kahan bidiagonalization with full reorthogonalization).
// Stops once the estimate moves by at most rel_tol for three steps; a loose
// rel_tol is enough for threshold tests.
double largest_singular_value(
    std::size_t rows, std::size_t cols,
    const std::function<std::vector<cplx>(std::span<const cplx>)>& apply,
    const std::function<std::vector<cplx>(std::span<const cplx>)>& apply_adjoint,
    double rel_tol = 0.0);

}  // namespace specexact
