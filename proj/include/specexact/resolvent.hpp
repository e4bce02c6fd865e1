#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "specexact/matrix.hpp"
#include "specexact/operator_model.hpp"

namespace specexact {

// 1 / sigma_min(M - z); +inf when M - z is exactly singular.
double resolvent_norm(const ComplexMatrix& m, cplx z);

struct PseudoGrid {
  double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
  std::size_t nx = 0, ny = 0;
  std::size_t section_size = 0;
  std::vector<double> values;  // values[iy * nx + ix]; +inf where singular

  cplx node(std::size_t ix, std::size_t iy) const;
  double at(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
  // Header re,im,resnorm; rows in the order of `values`; "inf" for the sentinel.
  std::string to_csv() const;
};

// Uniform lattice including the rectangle corners. ArgumentError when
// nx or ny < 2 or the rectangle is degenerate.
PseudoGrid pseudospectrum_grid(const ComplexMatrix& m, double re_min, double re_max,
                               double im_min, double im_max, std::size_t nx, std::size_t ny);

// Section for a ladder size (truncation order, cut point or grid index).
using SectionBuilder = std::function<ComplexMatrix(std::size_t)>;
SectionBuilder galerkin_builder(const OperatorSpec& spec);

enum class ProbeVerdict { kBoundedEvidence, kUnboundedEvidence, kInconclusive };
const char* to_string(ProbeVerdict v) noexcept;

struct ProbeThresholds {
  double unbounded_floor = 1e-10;  // relative to scale
  double bounded_floor = 1e-6;
  double trend_ratio = 0.5;        // tail/head geometric means
  double final_drop = 0.1;         // final/initial for unbounded evidence
  double bounded_final_ratio = 0.5;
};

struct RegionProbe {
  cplx z;
  std::vector<std::size_t> sizes;
  std::vector<double> values;  // sigma_min(M_n - z)
  ProbeVerdict verdict = ProbeVerdict::kInconclusive;
  double head_geomean = 0.0;   // first third of the ladder
  double tail_geomean = 0.0;   // last third
  double tail_min = 0.0;
  double scale = 0.0;          // |M_{n_max}|
};

// ArgumentError unless sizes has at least 6 strictly increasing entries.
RegionProbe region_probe(const SectionBuilder& sections, cplx z,
                         const std::vector<std::size_t>& sizes,
                         const ProbeThresholds& th = {});

struct ContourRank {
  cplx center;
  double radius = 0.0;
  std::size_t quadrature = 0;
  // Full projection for small matrices; larger ones are only sketched.
  std::optional<ComplexMatrix> projection;
  std::vector<double> singular_values;  // descending, of P or of its sketch
  std::size_t rank = 0;
  double gap = 0.0;  // smallest kept / largest dropped
};

// Riesz projection by the trapezoid rule on |z - center| = radius.
// ContourError when a quadrature node is within reach of the spectrum
// (resolvent norm above 1e8 / radius), ResolutionError when the singular
// values do not split by a factor of 10 around 0.5.
ContourRank contour_rank(const ComplexMatrix& m, cplx center, double radius,
                         std::size_t quadrature = 64);

}  // namespace specexact
