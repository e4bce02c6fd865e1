#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

namespace specexact::detail {

enum class QlStatus { kOk, kNoConvergence, kBreakdown };

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

inline double root_of(double x) { return std::sqrt(x); }
inline std::complex<double> root_of(const std::complex<double>& x) { return std::sqrt(x); }

// Sign of r chosen so that |g + r| is not smaller than |g - r|.
inline double align(double r, double g) { return g >= 0.0 ? std::abs(r) : -std::abs(r); }
inline std::complex<double> align(const std::complex<double>& r, const std::complex<double>& g) {
  return (std::conj(g) * r).real() < 0.0 ? -r : r;
}

// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix
// (d: diagonal, e[i]: coupling of i and i+1, e[n-1] ignored). For complex T the
// rotations are complex orthogonal (c^2 + s^2 = 1), which preserves complex
// symmetry but is not unitary; kBreakdown flags a near-isotropic rotation.
// On exit d holds the eigenvalues (unsorted).
template <class T>
QlStatus tridiagonal_ql(std::vector<T>& d, std::vector<T>& e, std::size_t max_total,
                        std::size_t& stuck) {
  const std::size_t n = d.size();
  if (n == 0) return QlStatus::kOk;
  e.resize(n);
  e[n - 1] = T(0);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::size_t total = 0;
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = magnitude(d[m]) + magnitude(d[m + 1]);
        if (magnitude(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++total > max_total) {
          stuck = l;
          return QlStatus::kNoConvergence;
        }
        T g = (d[l + 1] - d[l]) / (T(2) * e[l]);
        T r = root_of(g * g + T(1));
        g = d[m] - d[l] + e[l] / (g + align(r, g));
        T s = T(1), c = T(1), p = T(0);
        bool restarted = false;
        for (std::size_t i = m; i-- > l;) {
          const T f = s * e[i];
          const T b = c * e[i];
          r = root_of(f * f + g * g);
          if constexpr (!std::is_same_v<T, double>) {
            if (magnitude(r) < 1e-8 * (magnitude(f) + magnitude(g))) {
              stuck = l;
              return QlStatus::kBreakdown;
            }
          }
          e[i + 1] = r;
          if (r == T(0)) {
            d[i + 1] -= p;
            e[m] = T(0);
            restarted = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + T(2) * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (restarted) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = T(0);
      }
    } while (m != l);
  }
  return QlStatus::kOk;
}

}  // namespace specexact::detail
