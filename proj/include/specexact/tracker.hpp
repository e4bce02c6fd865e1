#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "specexact/matrix.hpp"
#include "specexact/numerics.hpp"
#include "specexact/resolvent.hpp"

namespace specexact {

// A truncation family: sizes and how to build the section for each size.
struct Ladder {
  std::string name;
  SectionBuilder sections;
  std::vector<std::size_t> sizes;
};

// Rectangle in the complex plane; eigenvalues outside are not tracked.
struct Window {
  double re_min = -1e300, re_max = 1e300, im_min = -1e300, im_max = 1e300;
  bool contains(cplx z) const noexcept {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
  }
};

struct SpectrumResult {
  std::size_t size = 0;
  std::vector<cplx> eigenvalues;  // sorted by (Re, Im), filtered to the window
  std::vector<double> residuals;  // aligned with eigenvalues
  ResidualKind residual_kind = ResidualKind::kEigenvector;
  double norm = 0.0;              // norm_bound of the section
  std::size_t dimension = 0;
};

std::vector<SpectrumResult> ladder_spectra(const Ladder& ladder, const Window& window = {});

struct Trajectory {
  std::vector<std::size_t> sizes;  // strictly increasing
  std::vector<cplx> values;
  // max |lambda_{j+1} - lambda_j| over the last third of the steps; +inf for
  // a single point
  double cauchy_tail() const;
};

// Default match radius between two spectra: half the median nearest-neighbour
// spacing of the smaller one (falling back to the larger one, then +inf).
double default_match_radius(const std::vector<cplx>& a, const std::vector<cplx>& b);

// Consecutive spectra are paired by a minimum-cost assignment with cost
// |lambda - mu|; pairs costing more than the match radius are cut. Every
// section eigenvalue ends up in exactly one trajectory.
std::vector<Trajectory> match_trajectories(const std::vector<SpectrumResult>& spectra,
                                           std::optional<double> match_radius = {});

struct LimitCandidate {
  cplx value;
  std::size_t multiplicity = 0;        // number of merged trajectories
  std::vector<std::size_t> trajectories;
  std::string source;                  // ladder name
};

// max(1e-6 |M|, 10 tol)
double clustering_radius(double norm, double tol) noexcept;

// Trajectories alive at final_size, covering at least half of ladder_length
// sizes and with Cauchy tail below tol yield their last value; candidates
// within `radius` merge.
std::vector<LimitCandidate> detect_limits(const std::vector<Trajectory>& trajectories,
                                          std::size_t ladder_length, std::size_t final_size,
                                          double tol, double radius);

struct MultiplicityReport {
  std::vector<std::size_t> sizes;
  std::vector<std::optional<std::size_t>> ranks;  // empty where the contour failed
  std::optional<std::size_t> multiplicity;        // last three ranks equal
  std::optional<std::size_t> stable_from;         // first size of the final constant run
  double radius = 0.0;
  std::vector<std::string> notes;
};

MultiplicityReport multiplicity_check(cplx lambda, const Ladder& ladder, double radius,
                                      std::size_t quadrature = 64);

enum class Verdict { kTrueEigenvalue, kSpurious, kUndecided };
const char* to_string(Verdict v) noexcept;

struct ClassifyOptions {
  double tol = 1e-3;
  double radius = 0.0;  // clustering radius
  std::optional<double> contour_radius;  // auto_contour_radius with no neighbours if empty
  bool contour_blocked = false;          // neighbours too close for any contour
  std::size_t quadrature = 64;
};

struct ClassifiedPoint {
  cplx value;
  Verdict verdict = Verdict::kUndecided;
  std::size_t multiplicity = 0;  // for kTrueEigenvalue
  RegionProbe probe;
  MultiplicityReport ranks;
  std::size_t uncertified_hits = 0;   // uncertified sizes with an eigenvalue near value
  std::size_t uncertified_sizes = 0;
  std::string source;
  std::vector<std::string> notes;
};

// Region probe and contour ranks along the certified ladder; the uncertified
// ladder (spectra already computed) can only testify to pollution.
ClassifiedPoint classify_point(cplx lambda, const Ladder& certified,
                               const std::vector<SpectrumResult>* uncertified,
                               const ClassifyOptions& opts);

// Half the distance to the nearest other candidate, capped at 1 and raised
// to 100 radius when that does not reach the neighbour. Empty when the
// neighbour is closer than 4 radius.
std::optional<double> auto_contour_radius(cplx lambda, const std::vector<cplx>& others,
                                          double radius);

struct TrackingReport {
  std::vector<SpectrumResult> certified_spectra;
  std::vector<SpectrumResult> uncertified_spectra;
  std::vector<Trajectory> certified_trajectories;
  std::vector<Trajectory> uncertified_trajectories;
  std::vector<LimitCandidate> candidates;
  std::vector<ClassifiedPoint> points;
  double radius = 0.0;
  double tol = 0.0;
};

// Spectra, trajectories and limits on both ladders, then classification of
// every candidate inside the window.
TrackingReport track_and_classify(const Ladder& certified, const Ladder* uncertified,
                                  const Window& window, double tol,
                                  std::size_t quadrature = 64);

}  // namespace specexact
