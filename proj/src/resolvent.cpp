#include "specexact/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"
#include "specexact/parallel.hpp"

namespace specexact {

namespace {

constexpr std::size_t kDenseProjectionLimit = 96;

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double geomean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) {
    if (!(x > 0.0)) return 0.0;
    s += std::log(x);
  }
  return std::exp(s / static_cast<double>(xs.size()));
}

// Orthonormal basis of the column span of y; columns that vanish against the
// previous ones are dropped.
std::vector<std::vector<cplx>> orthonormal_columns(const ComplexMatrix& y) {
  std::vector<std::vector<cplx>> basis;
  for (std::size_t c = 0; c < y.cols(); ++c) {
    std::vector<cplx> v(y.rows());
    for (std::size_t i = 0; i < y.rows(); ++i) v[i] = y(i, c);
    const double original = vector_norm(v);
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        cplx d{};
        for (std::size_t i = 0; i < v.size(); ++i) d += std::conj(b[i]) * v[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
      }
    const double nv = vector_norm(v);
    if (nv <= 1e-13 * original) continue;
    for (auto& x : v) x /= nv;
    basis.push_back(std::move(v));
  }
  return basis;
}

void rank_and_gap(ContourRank& out) {
  const auto& sv = out.singular_values;
  out.rank = static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [](double s) { return s > 0.5; }));
  const double kept = out.rank ? sv[out.rank - 1] : 1.0;
  const double dropped = out.rank < sv.size() ? sv[out.rank] : 0.0;
  out.gap = dropped > 0.0 ? kept / dropped : std::numeric_limits<double>::infinity();
}

}  // namespace

double resolvent_norm(const ComplexMatrix& m, cplx z) {
  if (!m.is_square()) throw DimensionError("resolvent_norm: matrix is not square");
  const double s = sigma_min(m.shifted(z));
  return s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();
}

cplx PseudoGrid::node(std::size_t ix, std::size_t iy) const {
  const double x = re_min + (re_max - re_min) * static_cast<double>(ix) / static_cast<double>(nx - 1);
  const double y = im_min + (im_max - im_min) * static_cast<double>(iy) / static_cast<double>(ny - 1);
  return {x, y};
}

std::string PseudoGrid::to_csv() const {
  std::string out = "re,im,resnorm\n";
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const cplx z = node(ix, iy);
      out += format_double(z.real()) + "," + format_double(z.imag()) + "," +
             format_double(at(ix, iy)) + "\n";
    }
  return out;
}

PseudoGrid pseudospectrum_grid(const ComplexMatrix& m, double re_min, double re_max,
                               double im_min, double im_max, std::size_t nx, std::size_t ny) {
  if (nx < 2 || ny < 2) throw ArgumentError("pseudospectrum_grid: need at least 2 x 2 nodes");
  if (!(re_max > re_min) || !(im_max > im_min))
    throw ArgumentError("pseudospectrum_grid: degenerate rectangle");
  if (!m.is_square()) throw DimensionError("pseudospectrum_grid: matrix is not square");
  PseudoGrid g;
  g.re_min = re_min;
  g.re_max = re_max;
  g.im_min = im_min;
  g.im_max = im_max;
  g.nx = nx;
  g.ny = ny;
  g.section_size = m.rows();
  g.values.assign(nx * ny, 0.0);
  parallel_for(nx * ny, [&](std::size_t k) {
    g.values[k] = resolvent_norm(m, g.node(k % nx, k / nx));
  });
  return g;
}

SectionBuilder galerkin_builder(const OperatorSpec& spec) {
  return [spec](std::size_t k) { return truncate(spec, k).matrix; };
}

const char* to_string(ProbeVerdict v) noexcept {
  switch (v) {
    case ProbeVerdict::kBoundedEvidence: return "BoundedEvidence";
    case ProbeVerdict::kUnboundedEvidence: return "UnboundedEvidence";
    case ProbeVerdict::kInconclusive: return "Inconclusive";
  }
  return "?";
}

RegionProbe region_probe(const SectionBuilder& sections, cplx z,
                         const std::vector<std::size_t>& sizes, const ProbeThresholds& th) {
  if (sizes.size() < 6) throw ArgumentError("region_probe: ladder needs at least 6 sizes");
  for (std::size_t k = 1; k < sizes.size(); ++k)
    if (sizes[k] <= sizes[k - 1])
      throw ArgumentError("region_probe: ladder sizes must increase strictly");

  RegionProbe p;
  p.z = z;
  p.sizes = sizes;
  p.values.assign(sizes.size(), 0.0);
  parallel_for(sizes.size(), [&](std::size_t k) {
    const ComplexMatrix m = sections(sizes[k]);
    p.values[k] = sigma_min(m.shifted(z));
    if (k + 1 == sizes.size()) p.scale = op_norm(m);
  });

  const std::size_t third = sizes.size() / 3;
  const std::span<const double> all(p.values);
  p.head_geomean = geomean(all.first(third));
  p.tail_geomean = geomean(all.last(third));
  p.tail_min = *std::min_element(p.values.end() - static_cast<long>(third), p.values.end());
  const double first = p.values.front(), last = p.values.back();
  const double lowest = *std::min_element(p.values.begin(), p.values.end());
  const double scale = std::max(p.scale, std::numeric_limits<double>::min());

  if (last < th.unbounded_floor * scale ||
      (p.tail_geomean < th.trend_ratio * p.head_geomean && last < th.final_drop * first))
    p.verdict = ProbeVerdict::kUnboundedEvidence;
  else if (lowest >= th.bounded_floor * scale && last >= th.bounded_final_ratio * first)
    p.verdict = ProbeVerdict::kBoundedEvidence;
  else
    p.verdict = ProbeVerdict::kInconclusive;
  return p;
}

ContourRank contour_rank(const ComplexMatrix& m, cplx center, double radius,
                         std::size_t quadrature) {
  if (!m.is_square() || m.rows() == 0) throw DimensionError("contour_rank: need a square matrix");
  if (quadrature < 16) throw ArgumentError("contour_rank: need at least 16 quadrature points");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ArgumentError("contour_rank: radius must be positive");

  const std::size_t n = m.rows();
  const std::size_t kl = m.lower_bandwidth(), ku = m.upper_bandwidth();
  const bool banded = detail::band_storage_pays(n, kl, ku);
  const bool dense_path = n <= kDenseProjectionLimit;
  // Keep the factors between the two sketch passes unless that gets heavy.
  const bool keep = dense_path || banded || n <= 400;
  const double qd = static_cast<double>(quadrature);
  const double limit = 1e8 / radius;

  std::vector<cplx> nodes(quadrature), weights(quadrature);
  for (std::size_t q = 0; q < quadrature; ++q) {
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(q) + 0.5) / qd;
    const cplx e = std::polar(1.0, theta);
    nodes[q] = center + radius * e;
    // (1/2 pi i) contour integral of (z - M)^{-1} dz, written with (M - z)^{-1}
    weights[q] = -radius * e / qd;
  }

  std::vector<std::optional<LuFactor>> lus(quadrature);
  auto factor_at = [&](std::size_t q) {
    LuFactor lu(m, nodes[q], kl, ku);
    if (lu.exactly_singular())
      throw ContourError("contour_rank: eigenvalue on the contour near z = " +
                         format_double(nodes[q].real()) + " + " +
                         format_double(nodes[q].imag()) + "i");
    return lu;
  };
  parallel_for(quadrature, [&](std::size_t q) {
    LuFactor lu = factor_at(q);
    const double rn = largest_singular_value(
        n, n, [&](std::span<const cplx> x) { return lu.solve(x); },
        [&](std::span<const cplx> x) { return lu.solve_adjoint(x); }, 1e-3);
    if (!std::isfinite(rn) || rn > limit)
      throw ContourError("contour_rank: resolvent norm " + format_double(rn) +
                         " at quadrature node " + std::to_string(q) +
                         " exceeds 1e8 / radius; an eigenvalue is too close to the contour");
    if (keep) lus[q].emplace(std::move(lu));
  });
  auto lu_at = [&](std::size_t q) -> LuFactor { return keep ? *lus[q] : factor_at(q); };

  ContourRank out;
  out.center = center;
  out.radius = radius;
  out.quadrature = quadrature;

  // sum_q w_q X_q in fixed order, X_q computed in parallel
  auto accumulate = [&](const ComplexMatrix& rhs, bool adjoint) {
    std::vector<ComplexMatrix> parts(quadrature);
    parallel_for(quadrature, [&](std::size_t q) {
      const LuFactor lu = lu_at(q);
      ComplexMatrix x(n, rhs.cols());
      std::vector<cplx> col(n);
      for (std::size_t c = 0; c < rhs.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) col[i] = rhs(i, c);
        const auto s = adjoint ? lu.solve_adjoint(col) : lu.solve(col);
        for (std::size_t i = 0; i < n; ++i) x(i, c) = s[i];
      }
      x *= adjoint ? std::conj(weights[q]) : weights[q];
      parts[q] = std::move(x);
    });
    ComplexMatrix sum(n, rhs.cols());
    for (const auto& p : parts) sum += p;
    return sum;
  };

  if (dense_path) {
    out.projection = accumulate(ComplexMatrix::identity(n), false);
    out.singular_values = singular_values(*out.projection);
    // A lone eigenvalue near the circle gives a scalar far from 0 and 1 that
    // the gap cannot see; a converged projection is idempotent.
    const ComplexMatrix& p = *out.projection;
    const double defect = (p * p - p).max_abs();
    if (defect > 0.1 * std::max(1.0, p.max_abs()))
      throw ResolutionError("contour_rank: quadrature has not converged (|P^2 - P| = " +
                                format_double(defect) + "); retry with more quadrature points",
                            2 * quadrature);
  } else {
    std::mt19937_64 rng(0xc0ffeeULL);
    std::normal_distribution<double> gauss;
    for (std::size_t k = std::min<std::size_t>(n, 8);; k = std::min(n, 2 * k)) {
      ComplexMatrix omega(n, k);
      for (auto& x : omega.data()) x = cplx(gauss(rng), gauss(rng));
      const auto basis = orthonormal_columns(accumulate(omega, false));
      ComplexMatrix qy(n, basis.size());
      for (std::size_t c = 0; c < basis.size(); ++c)
        for (std::size_t i = 0; i < n; ++i) qy(i, c) = basis[c][i];
      // P^H Q_Y = (Q_Y^H P)^H has the singular values of P restricted to range(Y)
      out.singular_values =
          basis.empty() ? std::vector<double>{} : singular_values(accumulate(qy, true));
      rank_and_gap(out);
      if (out.rank + 3 <= k || k == n) break;
    }
  }
  rank_and_gap(out);
  if (out.gap < 10.0)
    throw ResolutionError("contour_rank: singular values of the projection do not separate (gap " +
                              format_double(out.gap) + "); retry with more quadrature points",
                          2 * quadrature);
  return out;
}

}  // namespace specexact
