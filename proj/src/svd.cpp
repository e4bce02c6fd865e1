#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"
#include "tridiagonal_ql.hpp"

namespace specexact {

namespace {

// Dense paths below this dimension; Krylov on a factorization above.
constexpr std::size_t kDenseSvdLimit = 96;

double squared_norm(const std::vector<cplx>& x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return s;
}

void orthogonalize(std::vector<cplx>& w, const std::vector<std::vector<cplx>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      cplx h{};
      for (std::size_t i = 0; i < w.size(); ++i) h += std::conj(b[i]) * w[i];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= h * b[i];
    }
  }
}

// Largest singular value of the upper bidiagonal matrix (alpha; beta).
double bidiagonal_top(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t k = alpha.size();
  std::vector<double> d(k), e(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    d[i] = alpha[i] * alpha[i] + (i > 0 ? beta[i - 1] * beta[i - 1] : 0.0);
    if (i + 1 < k) e[i] = alpha[i] * beta[i];
  }
  std::size_t stuck = 0;
  detail::tridiagonal_ql(d, e, 60 * k + 60, stuck);
  const double top = *std::max_element(d.begin(), d.end());
  return std::sqrt(std::max(top, 0.0));
}

}  // namespace

std::vector<double> singular_values(const ComplexMatrix& m) {
  const ComplexMatrix a = m.cols() > m.rows() ? m.adjoint() : m;
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<std::vector<cplx>> col(cols, std::vector<cplx>(rows));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) col[j][i] = a(i, j);

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        auto& cp = col[p];
        auto& cq = col[q];
        double alpha = 0.0, beta = 0.0;
        cplx gamma{};
        for (std::size_t k = 0; k < rows; ++k) {
          alpha += std::norm(cp[k]);
          beta += std::norm(cq[k]);
          gamma += std::conj(cp[k]) * cq[k];
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const cplx phase = gamma / g;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const cplx unphase = std::conj(phase);
        for (std::size_t k = 0; k < rows; ++k) {
          const cplx x = cp[k];
          const cplx y = cq[k] * unphase;
          cp[k] = c * x - s * y;
          cq[k] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) sv[j] = vector_norm(col[j]);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

double largest_singular_value(
    std::size_t rows, std::size_t cols,
    const std::function<std::vector<cplx>(std::span<const cplx>)>& apply,
    const std::function<std::vector<cplx>(std::span<const cplx>)>& apply_adjoint,
    double rel_tol) {
  if (rows == 0 || cols == 0) return 0.0;
  const double tol = std::max(rel_tol, 4 * std::numeric_limits<double>::epsilon());
  const std::size_t kmax = std::min({rows, cols, std::size_t{400}});
  std::mt19937_64 rng(0x5eedf00dULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  std::vector<cplx> v(cols), u;
  double alpha = 0.0;
  for (int attempt = 0; attempt < 3 && alpha == 0.0; ++attempt) {
    for (auto& x : v) x = cplx(unif(rng), unif(rng));
    const double nv = std::sqrt(squared_norm(v));
    for (auto& x : v) x /= nv;
    u = apply(v);
    alpha = std::sqrt(squared_norm(u));
  }
  if (alpha == 0.0) return 0.0;
  for (auto& x : u) x /= alpha;

  std::vector<std::vector<cplx>> V{v}, U{u};
  std::vector<double> alphas{alpha}, betas;
  double est = alpha, prev = alpha;
  int stable = 0;
  for (std::size_t k = 1; k < kmax; ++k) {
    auto w = apply_adjoint(U.back());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= alphas.back() * V.back()[i];
    orthogonalize(w, V);
    const double beta = std::sqrt(squared_norm(w));
    if (beta <= 1e-15 * est) break;
    for (auto& x : w) x /= beta;
    V.push_back(std::move(w));

    auto z = apply(V.back());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= beta * U.back()[i];
    orthogonalize(z, U);
    const double a = std::sqrt(squared_norm(z));
    betas.push_back(beta);
    alphas.push_back(a);
    est = bidiagonal_top(alphas, betas);
    if (a <= 1e-15 * est) break;
    for (auto& x : z) x /= a;
    U.push_back(std::move(z));

    if (std::abs(est - prev) <= tol * est) {
      if (++stable >= 3) break;
    } else {
      stable = 0;
    }
    prev = est;
  }
  return std::max(est, bidiagonal_top(alphas, betas));
}

double sigma_min(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionError("sigma_min: matrix is not square");
  if (m.rows() == 0) throw DimensionError("sigma_min: empty matrix");
  LuFactor lu(m);
  if (lu.exactly_singular()) return 0.0;
  if (m.rows() <= kDenseSvdLimit) return singular_values(m).back();
  const double inv_norm = largest_singular_value(
      m.rows(), m.cols(), [&](std::span<const cplx> x) { return lu.solve(x); },
      [&](std::span<const cplx> x) { return lu.solve_adjoint(x); });
  return std::isfinite(inv_norm) && inv_norm > 0.0 ? 1.0 / inv_norm : 0.0;
}

double op_norm(const ComplexMatrix& m) {
  if (m.empty() || m.max_abs() == 0.0) return 0.0;
  if (std::min(m.rows(), m.cols()) <= kDenseSvdLimit) return singular_values(m).front();
  const ComplexMatrix mh = m.adjoint();
  return largest_singular_value(
      m.rows(), m.cols(), [&](std::span<const cplx> x) { return m * x; },
      [&](std::span<const cplx> x) { return mh * x; });
}

}  // namespace specexact
