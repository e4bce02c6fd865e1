#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "specexact/discretize.hpp"
#include "specexact/errors.hpp"
#include "specexact/operator_model.hpp"
#include "specexact/tracker.hpp"

using namespace specexact;

namespace {

SpectrumResult spec(std::size_t n, std::vector<cplx> ev) {
  SpectrumResult s;
  s.size = n;
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  s.eigenvalues = ev;
  s.dimension = ev.size();
  return s;
}

std::vector<std::size_t> range(std::size_t first, std::size_t step, std::size_t last) {
  std::vector<std::size_t> s;
  for (std::size_t k = first; k <= last; k += step) s.push_back(k);
  return s;
}

Ladder jacobi_ladder(std::size_t first, std::size_t last, std::string name) {
  return Ladder{std::move(name), galerkin_builder(jacobi_spec()), range(first, 2, last)};
}

SchrodingerProblem oscillator(std::string q) {
  SchrodingerProblem p;
  p.p = Coefficient::constant(0.0);
  p.q = Coefficient::parse(q);
  p.r = Coefficient::constant(0.0);
  p.half_widths = {4, 5, 6, 7, 8, 9, 10};
  return p;
}

Ladder schrodinger_ladder(const SchrodingerProblem& p, std::size_t m) {
  return Ladder{"oscillator",
                [p, m](std::size_t n) { return schrodinger_assemble(p, n, m).matrix; },
                range(1, 1, p.half_widths.size())};
}

// Set of trajectories as sets of (size, value) points.
std::set<std::vector<std::pair<std::size_t, double>>> partition(const std::vector<Trajectory>& ts) {
  std::set<std::vector<std::pair<std::size_t, double>>> out;
  for (const auto& t : ts) {
    std::vector<std::pair<std::size_t, double>> pts;
    for (std::size_t k = 0; k < t.sizes.size(); ++k) pts.emplace_back(t.sizes[k], t.values[k].real());
    std::sort(pts.begin(), pts.end());
    out.insert(pts);
  }
  return out;
}

}  // namespace

TEST_CASE("match_trajectories examples") {
  auto t = match_trajectories({spec(2, {1, 5}), spec(3, {1.1, 4.9, 9})});
  REQUIRE(t.size() == 3);
  CHECK(t[0].values == std::vector<cplx>{1.0, 1.1});
  CHECK(t[1].values == std::vector<cplx>{5.0, 4.9});
  CHECK(t[2].values == std::vector<cplx>{9.0});
  CHECK(t[2].sizes == std::vector<std::size_t>{3});

  auto same = match_trajectories({spec(4, {-1, 2, 7}), spec(5, {-1, 2, 7}), spec(6, {-1, 2, 7})});
  REQUIRE(same.size() == 3);
  for (const auto& tr : same) {
    CHECK(tr.values.size() == 3);
    CHECK(tr.cauchy_tail() == 0.0);
  }

  auto grow = match_trajectories({spec(1, {0}), spec(2, {0, 3})});
  REQUIRE(grow.size() == 2);
  CHECK(grow[0].values == std::vector<cplx>{0.0, 0.0});
  CHECK(grow[1].values == std::vector<cplx>{3.0});

  CHECK_THROWS_AS(match_trajectories({spec(1, {0})}), ArgumentError);
}

TEST_CASE("pairs beyond the match radius are cut") {
  auto t = match_trajectories({spec(1, {0, 10}), spec(2, {0.1, 13})}, 1.0);
  REQUIRE(t.size() == 3);
  CHECK(t[1].values.size() == 1);
  CHECK(t[2].values == std::vector<cplx>{13.0});
}

TEST_CASE("minimum total cost beats greedy nearest") {
  // greedy would pair 1.0 with 1.4 and leave 0 to 1.4's neighbour at 2
  auto t = match_trajectories({spec(1, {0.6, 1.0}), spec(2, {0.0, 1.4})}, 1.0);
  REQUIRE(t.size() == 2);
  CHECK(t[0].values == std::vector<cplx>{0.6, 0.0});
  CHECK(t[1].values == std::vector<cplx>{1.0, 1.4});
}

TEST_CASE("every eigenvalue belongs to exactly one trajectory") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<SpectrumResult> ladder;
  std::vector<cplx> base;
  for (std::size_t n = 3; n < 12; ++n) {
    base.push_back(cplx(g(rng), g(rng)));
    std::vector<cplx> ev;
    for (cplx z : base) ev.push_back(z + 0.01 * cplx(g(rng), g(rng)));
    ladder.push_back(spec(n, ev));
  }
  auto t = match_trajectories(ladder);
  std::size_t points = 0;
  for (const auto& tr : t) {
    points += tr.values.size();
    for (std::size_t k = 1; k < tr.sizes.size(); ++k) CHECK(tr.sizes[k] > tr.sizes[k - 1]);
  }
  std::size_t total = 0;
  for (const auto& s : ladder) total += s.eigenvalues.size();
  CHECK(points == total);
}

TEST_CASE("matching is symmetric under reversing the ladder") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::normal_distribution<double> g(0.0, 0.05);
    std::vector<double> base;
    for (int k = 0; k < 12; ++k) base.push_back(u(rng));
    std::vector<SpectrumResult> fwd;
    for (std::size_t n = 1; n <= 6; ++n) {
      std::vector<cplx> ev;
      for (std::size_t k = 0; k < base.size() - (6 - n); ++k) ev.push_back(base[k] + g(rng));
      fwd.push_back(spec(n, ev));
    }
    std::vector<SpectrumResult> rev(fwd.rbegin(), fwd.rend());
    // the reversed ladder has decreasing sizes; only the pairing is compared
    CHECK(partition(match_trajectories(fwd, 0.3)) == partition(match_trajectories(rev, 0.3)));
    CHECK(partition(match_trajectories(fwd)) == partition(match_trajectories(rev)));
  }
}

TEST_CASE("detect_limits examples") {
  Trajectory conv{{1, 2, 3, 4}, {1.1, 1.01, 1.001, 1.0001}};
  auto c = detect_limits({conv}, 4, 4, 1e-2, 0.1);
  REQUIRE(c.size() == 1);
  CHECK(std::abs(c[0].value - 1.0001) < 1e-15);
  CHECK(c[0].multiplicity == 1);

  Trajectory osc{{1, 2, 3, 4, 5, 6}, {1, -1, 1, -1, 1, -1}};
  CHECK(detect_limits({osc}, 6, 6, 1e-2, 0.1).empty());

  Trajectory a{{1, 2, 3}, {2.1, 2.01, 2.001}}, b{{1, 2, 3}, {1.9, 1.99, 1.999}};
  auto two = detect_limits({a, b}, 3, 3, 2e-2, 0.1);
  REQUIRE(two.size() == 1);
  CHECK(two[0].multiplicity == 2);
  CHECK(std::abs(two[0].value - 2.0) < 1e-12);

  // dead before the final size, or too short
  Trajectory dead{{1, 2, 3}, {5, 5, 5}};
  CHECK(detect_limits({dead}, 6, 6, 1e-2, 0.1).empty());
  Trajectory late{{5, 6}, {5, 5}};
  CHECK(detect_limits({late}, 6, 6, 1e-2, 0.1).empty());
  CHECK_THROWS_AS(detect_limits({conv}, 4, 4, 0.0, 0.1), ArgumentError);
}

TEST_CASE("Jacobi zero is spectral pollution") {
  auto even = jacobi_ladder(2, 40, "even");
  auto odd = jacobi_ladder(3, 41, "odd");
  auto odd_spectra = ladder_spectra(odd);
  ClassifyOptions opts;
  opts.radius = clustering_radius(odd_spectra.back().norm, 1e-3);
  auto p = classify_point(0.0, even, &odd_spectra, opts);
  CHECK(p.verdict == Verdict::kSpurious);
  CHECK(p.probe.verdict == ProbeVerdict::kBoundedEvidence);
  CHECK(p.uncertified_hits == odd_spectra.size());

  Window w{-1.0, 1.0, -1.0, 1.0};
  auto rep = track_and_classify(even, &odd, w, 1e-3);
  auto at0 = std::find_if(rep.points.begin(), rep.points.end(),
                          [](const ClassifiedPoint& c) { return std::abs(c.value) < 1e-8; });
  REQUIRE(at0 != rep.points.end());
  CHECK(at0->verdict == Verdict::kSpurious);
  CHECK(at0->source == "odd");
}

TEST_CASE("Jacobi verdict survives a longer ladder") {
  auto even = jacobi_ladder(2, 80, "even");
  auto odd = jacobi_ladder(3, 81, "odd");
  auto rep = track_and_classify(even, &odd, Window{-1, 1, -1, 1}, 1e-3);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].verdict == Verdict::kSpurious);
}

TEST_CASE("oscillator ground state is a true eigenvalue") {
  auto lad = schrodinger_ladder(oscillator("x^2"), 400);
  auto rep = track_and_classify(lad, nullptr, Window{0.0, 8.0, -1.0, 1.0}, 1e-2);
  REQUIRE(rep.points.size() >= 1);
  const auto& g = rep.points[0];
  CHECK(std::abs(g.value - 1.0) < 1e-2);
  CHECK(g.verdict == Verdict::kTrueEigenvalue);
  CHECK(g.multiplicity == 1);
  for (const auto& p : rep.points)
    if (p.verdict == Verdict::kTrueEigenvalue) CHECK(std::abs(p.value.imag()) <= rep.radius);
}

TEST_CASE("classification is equivariant under the adjoint") {
  auto prob = oscillator("i*x^2");
  auto lad = schrodinger_ladder(prob, 400);
  Ladder adj{"adjoint",
             [prob](std::size_t n) { return schrodinger_assemble(prob, n, 400).matrix.adjoint(); },
             lad.sizes};
  const cplx guess = std::polar(1.0, std::numbers::pi / 4);
  auto spectra = ladder_spectra(lad);
  cplx lambda = spectra.back().eigenvalues.front();
  for (cplx z : spectra.back().eigenvalues)
    if (std::abs(z - guess) < std::abs(lambda - guess)) lambda = z;
  ClassifyOptions opts;
  opts.radius = clustering_radius(spectra.back().norm, 1e-2);
  opts.contour_radius = 0.5;
  auto p = classify_point(lambda, lad, nullptr, opts);
  auto q = classify_point(std::conj(lambda), adj, nullptr, opts);
  CHECK(p.verdict == Verdict::kTrueEigenvalue);
  CHECK(p.verdict == q.verdict);
  CHECK(p.multiplicity == q.multiplicity);
}

TEST_CASE("gap point of a diagonal operator stays undecided") {
  Ladder diag{"diag", galerkin_builder(diagonal_spec("n", [](std::size_t k) { return double(k); })),
              range(4, 4, 40)};
  ClassifyOptions opts;
  opts.radius = 1e-2;
  auto p = classify_point(1.5, diag, nullptr, opts);
  CHECK(p.verdict == Verdict::kUndecided);
  CHECK(p.probe.verdict == ProbeVerdict::kBoundedEvidence);
  CHECK(std::find(p.notes.begin(), p.notes.end(),
                  "in resolvent set: no trajectory converges to the point") != p.notes.end());
}

TEST_CASE("multiplicity_check examples") {
  Ladder jordan{"jordan", [](std::size_t) { return ComplexMatrix::from_rows({{0, 1}, {0, 0}}); },
                {1, 2, 3, 4}};
  auto j = multiplicity_check(0.0, jordan, 1.0);
  REQUIRE(j.multiplicity);
  CHECK(*j.multiplicity == 2);
  CHECK(*j.stable_from == 1);

  SLProblem lap;
  lap.p = Coefficient::constant(1.0);
  lap.q = Coefficient::constant(0.0);
  lap.a = 0.0;
  lap.b = std::numbers::pi;
  lap.a_n = {0.0};
  lap.p_min = 1.0;
  Ladder grid{"laplace", [lap](std::size_t m) { return sl_assemble(lap, 1, m).matrix; },
              {25, 50, 100, 200, 400}};
  auto l = multiplicity_check(1.0, grid, 1.0);
  REQUIRE(l.multiplicity);
  CHECK(*l.multiplicity == 1);

  SLMatrixProblem dup;
  dup.tau1 = lap;
  dup.tau2 = lap;
  Ladder doubled{"doubled", [dup](std::size_t m) { return sl_block_assemble(dup, 1, m).matrix; },
                 {25, 50, 100, 200, 400}};
  for (double k : {1.0, 4.0, 9.0}) {
    auto s = multiplicity_check(k, grid, 1.0);
    auto d = multiplicity_check(k, doubled, 1.0);
    REQUIRE(s.multiplicity);
    REQUIRE(d.multiplicity);
    CHECK(*d.multiplicity == 2 * *s.multiplicity);
  }
}

TEST_CASE("contour ranks over disjoint contours sum to the dimension") {
  auto m = truncate(jacobi_spec(), 12).matrix;
  auto ev = eig_dense(m).eigenvalues;
  std::size_t total = 0;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    double gap = INFINITY;
    for (std::size_t j = 0; j < ev.size(); ++j)
      if (j != k) gap = std::min(gap, std::abs(ev[j] - ev[k]));
    total += contour_rank(m, ev[k], 0.4 * gap).rank;
  }
  CHECK(total == 12);
}

TEST_CASE("auto contour radius") {
  CHECK(*auto_contour_radius(0.0, {4.0}, 1e-3) == 1.0);
  CHECK(*auto_contour_radius(0.0, {0.5}, 1e-3) == 0.25);
  CHECK(*auto_contour_radius(0.0, {}, 0.02) == doctest::Approx(2.0));
  CHECK(!auto_contour_radius(0.0, {0.01}, 1e-2));
}

TEST_CASE("contours keep clear of eigenvalues outside the window") {
  // a large tolerance would otherwise blow the contour up to 100 radius
  Ladder lad{"diag",
             galerkin_builder(diagonal_spec("steps", [](std::size_t k) { return 1.0 + 0.5 * double(k - 1); })),
             range(6, 2, 20)};
  auto rep = track_and_classify(lad, nullptr, Window{0.9, 1.1, -1, 1}, 1e-2);
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].ranks.radius == doctest::Approx(0.25));
  CHECK(rep.points[0].verdict == Verdict::kTrueEigenvalue);
  CHECK(rep.points[0].multiplicity == 1);
}
