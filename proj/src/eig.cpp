#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"
#include "tridiagonal_ql.hpp"

namespace specexact {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Reflector {
  std::vector<cplx> v;
  cplx alpha;
  double beta = 0.0;  // H = I - beta v v^H
};

// Householder reflector mapping x onto alpha e_1. Returns false when x is
// already a multiple of e_1.
bool make_reflector(std::vector<cplx> x, Reflector& h) {
  bool tail_zero = true;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] != cplx{}) {
      tail_zero = false;
      break;
    }
  if (tail_zero) return false;
  const double xnorm = vector_norm(x);
  const cplx phase = x[0] == cplx{} ? cplx(1.0) : x[0] / std::abs(x[0]);
  h.alpha = -phase * xnorm;
  x[0] -= h.alpha;
  const double vn = vector_norm(x);
  h.beta = 2.0 / (vn * vn);
  h.v = std::move(x);
  return true;
}

void tridiagonalize_hermitian(ComplexMatrix& a) {
  const std::size_t n = a.rows();
  Reflector h;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    std::vector<cplx> x(len);
    for (std::size_t i = 0; i < len; ++i) x[i] = a(k + 1 + i, k);
    if (!make_reflector(std::move(x), h)) continue;
    const auto& v = h.v;
    std::vector<cplx> p(len);
    for (std::size_t i = 0; i < len; ++i) {
      cplx s{};
      for (std::size_t j = 0; j < len; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
      p[i] = h.beta * s;
    }
    cplx vp{};
    for (std::size_t i = 0; i < len; ++i) vp += std::conj(v[i]) * p[i];
    const double kk = 0.5 * h.beta * vp.real();
    for (std::size_t i = 0; i < len; ++i) p[i] -= kk * v[i];
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j)
        a(k + 1 + i, k + 1 + j) -= v[i] * std::conj(p[j]) + p[i] * std::conj(v[j]);
    a(k + 1, k) = h.alpha;
    a(k, k + 1) = std::conj(h.alpha);
    for (std::size_t i = 1; i < len; ++i) {
      a(k + 1 + i, k) = 0.0;
      a(k, k + 1 + i) = 0.0;
    }
  }
}

std::vector<cplx> hermitian_eigenvalues(const ComplexMatrix& m) {
  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  if (a.lower_bandwidth() > 1) tridiagonalize_hermitian(a);
  std::vector<double> d(n), e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  // A diagonal unitary similarity makes the off-diagonal real and nonnegative.
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = std::abs(a(i + 1, i));
  std::size_t stuck = 0;
  if (detail::tridiagonal_ql(d, e, 30 * n + 30, stuck) != detail::QlStatus::kOk)
    throw ConvergenceError("Hermitian QL did not converge at index " + std::to_string(stuck),
                           stuck);
  return {d.begin(), d.end()};
}

void balance(ComplexMatrix& h) {
  const std::size_t n = h.rows();
  constexpr double radix = 2.0;
  constexpr double sqr = radix * radix;
  bool done = false;
  for (int sweep = 0; !done && sweep < 100; ++sweep) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(h(j, i).real()) + std::abs(h(j, i).imag());
        r += std::abs(h(i, j).real()) + std::abs(h(i, j).imag());
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= sqr;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqr;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double inv = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) h(i, j) *= inv;
        for (std::size_t j = 0; j < n; ++j) h(j, i) *= f;
      }
    }
  }
}

void hessenberg(ComplexMatrix& h) {
  const std::size_t n = h.rows();
  Reflector r;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    std::vector<cplx> x(len);
    for (std::size_t i = 0; i < len; ++i) x[i] = h(k + 1 + i, k);
    if (!make_reflector(std::move(x), r)) continue;
    const auto& v = r.v;
    for (std::size_t j = k + 1; j < n; ++j) {
      cplx s{};
      for (std::size_t i = 0; i < len; ++i) s += std::conj(v[i]) * h(k + 1 + i, j);
      s *= r.beta;
      for (std::size_t i = 0; i < len; ++i) h(k + 1 + i, j) -= v[i] * s;
    }
    for (std::size_t row = 0; row < n; ++row) {
      cplx s{};
      for (std::size_t i = 0; i < len; ++i) s += h(row, k + 1 + i) * v[i];
      s *= r.beta;
      for (std::size_t i = 0; i < len; ++i) h(row, k + 1 + i) -= s * std::conj(v[i]);
    }
    h(k + 1, k) = r.alpha;
    for (std::size_t i = 1; i < len; ++i) h(k + 1 + i, k) = 0.0;
  }
}

struct Givens {
  double c;
  cplx s;
};

// G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
Givens givens(cplx a, cplx b) {
  const double aa = std::abs(a), bb = std::abs(b);
  if (bb == 0.0) return {1.0, 0.0};
  if (aa == 0.0) return {0.0, std::conj(b) / bb};
  const double r = std::hypot(aa, bb);
  return {aa / r, (a / aa) * std::conj(b) / r};
}

// Eigenvalue of the trailing 2x2 closer to its bottom-right entry.
cplx wilkinson_shift(cplx a, cplx b, cplx c, cplx d) {
  const cplx tr_half = 0.5 * (a + d);
  const cplx det = a * d - b * c;
  const cplx disc = std::sqrt(tr_half * tr_half - det);
  const cplx l1 = tr_half + disc, l2 = tr_half - disc;
  return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

// Shifted QR on an upper Hessenberg matrix; eigenvalues end on the diagonal.
void hessenberg_qr(ComplexMatrix& h) {
  const std::size_t n = h.rows();
  const double hnorm = std::max(h.frobenius_norm(), std::numeric_limits<double>::min());
  const std::size_t cap = 40 * n;
  std::size_t total = 0;
  std::size_t iu = n - 1;
  std::size_t its = 0;
  std::vector<Givens> rot(n);
  while (iu > 0) {
    // Locate the start of the active unreduced block.
    std::size_t il = iu;
    while (il > 0) {
      double tst = std::abs(h(il - 1, il - 1)) + std::abs(h(il, il));
      if (tst == 0.0) tst = hnorm;
      if (std::abs(h(il, il - 1)) <= kEps * tst) {
        h(il, il - 1) = 0.0;
        break;
      }
      --il;
    }
    if (il == iu) {
      --iu;
      its = 0;
      continue;
    }
    if (++total > cap)
      throw ConvergenceError("QR iteration did not converge at index " + std::to_string(iu), iu);
    ++its;
    cplx mu;
    if (its == 10 || its == 20) {
      mu = h(iu, iu) + 0.75 * std::abs(h(iu, iu - 1)) * cplx(1.0, 0.5);
    } else {
      mu = wilkinson_shift(h(iu - 1, iu - 1), h(iu - 1, iu), h(iu, iu - 1), h(iu, iu));
    }
    for (std::size_t k = il; k <= iu; ++k) h(k, k) -= mu;
    for (std::size_t k = il; k < iu; ++k) {
      const Givens g = givens(h(k, k), h(k + 1, k));
      rot[k] = g;
      for (std::size_t j = k; j < n; ++j) {
        const cplx x = h(k, j), y = h(k + 1, j);
        h(k, j) = g.c * x + g.s * y;
        h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
      }
      h(k + 1, k) = 0.0;
    }
    for (std::size_t k = il; k < iu; ++k) {
      const Givens g = rot[k];
      const std::size_t r_end = std::min(iu, k + 1);
      for (std::size_t r = 0; r <= r_end; ++r) {
        const cplx x = h(r, k), y = h(r, k + 1);
        h(r, k) = x * g.c + y * std::conj(g.s);
        h(r, k + 1) = -x * g.s + y * g.c;
      }
    }
    for (std::size_t k = il; k <= iu; ++k) h(k, k) += mu;
  }
}

std::vector<cplx> general_eigenvalues(const ComplexMatrix& m) {
  ComplexMatrix h = m;
  balance(h);
  hessenberg(h);
  hessenberg_qr(h);
  std::vector<cplx> ev(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) ev[i] = h(i, i);
  return ev;
}

bool lex_less(const cplx& a, const cplx& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::vector<cplx> band_matvec(const ComplexMatrix& m, std::size_t kl, std::size_t ku,
                              std::span<const cplx> x) {
  const std::size_t n = m.rows();
  std::vector<cplx> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > kl ? i - kl : 0;
    const std::size_t j1 = std::min(n - 1, i + ku);
    cplx s{};
    for (std::size_t j = j0; j <= j1; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace

double multiplicity_radius(double norm) noexcept { return std::max(1e-8 * norm, 1e-10); }

std::vector<EigenCluster> cluster_eigenvalues(std::span<const cplx> sorted, double radius) {
  const std::size_t n = sorted.size();
  // Union-find over pairs closer than the radius; the sort on Re lets the
  // inner scan stop early.
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n && sorted[j].real() - sorted[i].real() <= radius; ++j)
      if (std::abs(sorted[j] - sorted[i]) <= radius) parent[find(j)] = find(i);

  std::vector<EigenCluster> out;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.emplace_back();
    }
    out[slot[r]].members.push_back(i);
  }
  for (auto& c : out) {
    cplx sum{};
    for (auto k : c.members) sum += sorted[k];
    c.center = sum / static_cast<double>(c.members.size());
    for (auto k : c.members) c.radius = std::max(c.radius, std::abs(sorted[k] - c.center));
  }
  return out;
}

std::vector<cplx> eigenvalues(const ComplexMatrix& m) {
  return eig_dense(m, EigOptions{.residuals = false, .eigenvectors = false}).eigenvalues;
}

EigenDecomposition eig_dense(const ComplexMatrix& m, const EigOptions& opts) {
  if (!m.is_square()) throw DimensionError("eig_dense: matrix is not square");
  const std::size_t n = m.rows();
  if (n == 0) throw DimensionError("eig_dense: empty matrix");
  if (!m.all_finite()) throw ArgumentError("eig_dense: non-finite entry");

  EigenDecomposition out;
  out.norm = norm_bound(m);
  std::vector<cplx> ev;
  if (n == 1) {
    ev = {m(0, 0)};
  } else if (m.is_hermitian()) {
    ev = hermitian_eigenvalues(m);
  } else {
    bool done = false;
    if (m.is_symmetric() && m.lower_bandwidth() <= 1) {
      std::vector<cplx> d(n), e(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = m(i, i);
      for (std::size_t i = 0; i + 1 < n; ++i) e[i] = m(i + 1, i);
      std::size_t stuck = 0;
      if (detail::tridiagonal_ql(d, e, 30 * n + 30, stuck) == detail::QlStatus::kOk) {
        ev = std::move(d);
        done = std::all_of(ev.begin(), ev.end(), [](const cplx& z) {
          return std::isfinite(z.real()) && std::isfinite(z.imag());
        });
      }
    }
    if (!done) ev = general_eigenvalues(m);
  }
  std::sort(ev.begin(), ev.end(), lex_less);
  out.eigenvalues = ev;
  out.cluster_radius = multiplicity_radius(out.norm);
  out.clusters = cluster_eigenvalues(out.eigenvalues, out.cluster_radius);

  if (!opts.residuals && !opts.eigenvectors) return out;

  const std::size_t kl = m.lower_bandwidth(), ku = m.upper_bandwidth();
  const bool affordable = n <= 100 || detail::band_storage_pays(n, kl, ku);
  if (!affordable) {
    out.residual_kind = ResidualKind::kBackwardErrorProxy;
    out.residuals.assign(n, static_cast<double>(n) * kEps * out.norm);
    return out;
  }

  // Inverse iteration from a fixed start vector, two steps per eigenvalue.
  out.residual_kind = ResidualKind::kEigenvector;
  out.residuals.resize(n);
  if (opts.eigenvectors) out.eigenvectors = ComplexMatrix(n, n);
  const double scale = std::max(out.norm, 1.0);
  std::vector<cplx> start(n);
  for (std::size_t i = 0; i < n; ++i)
    start[i] = cplx(1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i)),
                    0.25 * std::cos(0.7 * static_cast<double>(i)));
  for (std::size_t k = 0; k < n; ++k) {
    const cplx lambda = ev[k];
    cplx delta = 1e-10 * scale * cplx(0.6, 0.8);
    std::vector<cplx> x = start;
    bool ok = false;
    for (int attempt = 0; attempt < 4 && !ok; ++attempt, delta *= 10.0) {
      LuFactor lu(m, lambda + delta, kl, ku);
      if (lu.exactly_singular()) continue;
      x = start;
      ok = true;
      for (int it = 0; it < 2; ++it) {
        x = lu.solve(x);
        const double nx = vector_norm(x);
        if (!std::isfinite(nx) || nx == 0.0) {
          ok = false;
          break;
        }
        for (auto& v : x) v /= nx;
      }
    }
    if (!ok) {
      out.residuals[k] = static_cast<double>(n) * kEps * out.norm;
      continue;
    }
    auto mx = band_matvec(m, kl, ku, x);
    for (std::size_t i = 0; i < n; ++i) mx[i] -= lambda * x[i];
    out.residuals[k] = vector_norm(mx);
    if (out.eigenvectors)
      for (std::size_t i = 0; i < n; ++i) (*out.eigenvectors)(i, k) = x[i];
  }
  return out;
}

}  // namespace specexact
