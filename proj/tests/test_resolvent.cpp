#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"
#include "specexact/operator_model.hpp"
#include "specexact/parallel.hpp"
#include "specexact/resolvent.hpp"

using namespace specexact;

namespace {

ComplexMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (auto& x : m.data()) x = cplx(g(rng), g(rng));
  return m;
}

double dist_to_spectrum(cplx z, const std::vector<cplx>& ev) {
  double d = INFINITY;
  for (cplx l : ev) d = std::min(d, std::abs(z - l));
  return d;
}

std::vector<std::size_t> ladder(std::size_t first, std::size_t step, std::size_t last) {
  std::vector<std::size_t> s;
  for (std::size_t k = first; k <= last; k += step) s.push_back(k);
  return s;
}

}  // namespace

TEST_CASE("resolvent_norm examples") {
  CHECK(resolvent_norm(ComplexMatrix::diagonal({0, 1}), 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(resolvent_norm(ComplexMatrix::identity(3), 3.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(resolvent_norm(ComplexMatrix::from_rows({{0, 2}, {2, 0}}), 0.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::isinf(resolvent_norm(ComplexMatrix::diagonal({0, 1}), 1.0)));
  CHECK_THROWS_AS(resolvent_norm(ComplexMatrix(2, 3), 0.0), DimensionError);
}

TEST_CASE("pseudospectrum grid examples") {
  // 4 x 3 lattice on [-1, 2] x [-1, 1]: node (1.0, 0.0) is ix = 2, iy = 1
  auto g = pseudospectrum_grid(ComplexMatrix::diagonal({0, 1}), -1, 2, -1, 1, 7, 3);
  CHECK(std::abs(g.node(3, 1) - cplx(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(g.at(3, 1) - 2.0) < 1e-12);
  CHECK(std::isinf(g.at(2, 1)));  // z = 0
  CHECK(g.values.size() == 21);

  const auto csv = g.to_csv();
  CHECK(csv.rfind("re,im,resnorm\n", 0) == 0);
  CHECK(csv.find(",inf\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);

  auto nil = pseudospectrum_grid(ComplexMatrix::from_rows({{0, 100}, {0, 0}}), -0.1, 0.1, -0.1, 0.1,
                                 3, 3);
  CHECK(std::abs(nil.node(2, 1) - cplx(0.1, 0)) < 1e-15);
  CHECK(nil.at(2, 1) >= 1000.0);
  CHECK(nil.at(2, 1) == doctest::Approx(10000.009999990001).epsilon(1e-12));

  CHECK_THROWS_AS(pseudospectrum_grid(ComplexMatrix::identity(2), 0, 1, 0, 1, 1, 4), ArgumentError);
  CHECK_THROWS_AS(pseudospectrum_grid(ComplexMatrix::identity(2), 1, 1, 0, 1, 4, 4), ArgumentError);
}

TEST_CASE("Hermitian grids are reciprocal distances to the spectrum") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_matrix(6 + trial, rng);
    ComplexMatrix h = 0.5 * (a + a.adjoint());
    const auto ev = eigenvalues(h);
    auto g = pseudospectrum_grid(h, -4, 4, -1, 1, 9, 5);
    for (std::size_t iy = 0; iy < g.ny; ++iy)
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const double expect = 1.0 / dist_to_spectrum(g.node(ix, iy), ev);
        CHECK(std::abs(g.at(ix, iy) - expect) <= 1e-8 * expect);
      }
  }
}

TEST_CASE("resolvent norm dominates the reciprocal distance") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gz(0.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto m = random_matrix(2 + trial % 9, rng);
    m(0, m.cols() - 1) += 5.0;  // some non-normality
    const auto ev = eigenvalues(m);
    for (int k = 0; k < 5; ++k) {
      const cplx z(gz(rng), gz(rng));
      CHECK(resolvent_norm(m, z) >= 1.0 / dist_to_spectrum(z, ev) - 1e-10);
    }
  }
}

TEST_CASE("grid is independent of the worker count") {
  std::mt19937_64 rng(3);
  auto m = random_matrix(30, rng);
  set_thread_count(1);
  auto a = pseudospectrum_grid(m, -3, 3, -3, 3, 8, 6);
  set_thread_count(4);
  auto b = pseudospectrum_grid(m, -3, 3, -3, 3, 8, 6);
  set_thread_count(0);
  CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("region probes on the Jacobi ladder") {
  const auto jac = galerkin_builder(jacobi_spec());
  auto even = region_probe(jac, 0.0, ladder(2, 2, 40));
  CHECK(even.verdict == ProbeVerdict::kBoundedEvidence);
  CHECK(even.values.front() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(even.values.back() == doctest::Approx(1.9092722).epsilon(1e-6));

  auto odd = region_probe(jac, 0.0, ladder(3, 2, 41));
  CHECK(odd.verdict == ProbeVerdict::kUnboundedEvidence);
  for (double v : odd.values) CHECK(v == 0.0);

  auto id = region_probe(galerkin_builder(identity_spec()), 2.0, ladder(1, 1, 8));
  CHECK(id.verdict == ProbeVerdict::kBoundedEvidence);
  for (double v : id.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(region_probe(jac, 0.0, {2, 4, 6, 8, 10}), ArgumentError);
  CHECK_THROWS_AS(region_probe(jac, 0.0, {2, 4, 6, 6, 8, 10}), ArgumentError);
}

TEST_CASE("region probe verdicts survive extending the ladder") {
  const auto jac = galerkin_builder(jacobi_spec());
  auto a = region_probe(jac, 0.0, ladder(2, 2, 40));
  auto b = region_probe(jac, 0.0, ladder(2, 2, 80));
  CHECK(a.verdict == b.verdict);
  auto c = region_probe(jac, 0.0, ladder(3, 2, 41));
  auto d = region_probe(jac, 0.0, ladder(3, 2, 81));
  CHECK(c.verdict == d.verdict);
  auto e = region_probe(jac, 0.0, ladder(2, 2, 40));
  CHECK(e.values == a.values);
}

TEST_CASE("decaying sigma_min gives unbounded evidence") {
  // diag(1, 1/2, 1/3, ...) at z = 0: sigma_min = 1/n
  auto inv = galerkin_builder(diagonal_spec("inv", [](std::size_t k) { return 1.0 / double(k); }));
  auto p = region_probe(inv, 0.0, {10, 20, 40, 80, 160, 320});
  CHECK(p.verdict == ProbeVerdict::kUnboundedEvidence);
}

TEST_CASE("contour_rank examples") {
  auto a = contour_rank(ComplexMatrix::diagonal({0, 5}), 0.0, 1.0);
  CHECK(a.rank == 1);
  CHECK(a.gap >= 10.0);
  REQUIRE(a.projection);
  CHECK(std::abs((*a.projection)(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs((*a.projection)(1, 1)) < 1e-12);

  CHECK(contour_rank(ComplexMatrix::from_rows({{0, 1}, {0, 0}}), 0.0, 1.0).rank == 2);
  CHECK(contour_rank(ComplexMatrix::diagonal({0.1, 0.2, 5}), 0.0, 1.0).rank == 2);
  CHECK(contour_rank(ComplexMatrix::diagonal({3, 5}), 0.0, 1.0).rank == 0);
}

TEST_CASE("contour_rank errors") {
  CHECK_THROWS_AS(contour_rank(ComplexMatrix::diagonal({0, 5}), 0.0, 1.0, 8), ArgumentError);
  // eigenvalue 1 sits exactly on the circle between nodes; 1e8 / r is exceeded
  // only when it is close to a node, so put it on one
  const double theta = std::numbers::pi / 16.0;  // first node for Q = 16
  auto on_node = ComplexMatrix::diagonal({std::polar(1.0, theta), 5});
  CHECK_THROWS_AS(contour_rank(on_node, 0.0, 1.0, 16), ContourError);
  // too close to the contour for the trapezoid rule with Q = 16
  CHECK_THROWS_AS(contour_rank(ComplexMatrix::diagonal({0.97, 5}), 0.0, 1.0, 16), ResolutionError);
  // 0.28 left over from the outside eigenvalue: gap below 10
  CHECK_THROWS_AS(contour_rank(ComplexMatrix::diagonal({0.0, 1.1}), 0.0, 1.0, 16), ResolutionError);
  CHECK(contour_rank(ComplexMatrix::diagonal({0.0, 1.1}), 0.0, 1.0, 256).rank == 1);
  try {
    contour_rank(ComplexMatrix::diagonal({0.97, 5}), 0.0, 1.0, 16);
  } catch (const ResolutionError& e) {
    CHECK(e.suggested_points() == 32);
  }
}

TEST_CASE("contour_rank matches clustered eigenvalue counts on random matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int checked = 0;
  while (checked < 100) {
    const std::size_t n = 1 + rng() % 12;
    auto m = random_matrix(n, rng);
    const auto ev = eig_dense(m).eigenvalues;
    const cplx c(u(rng), u(rng));
    const double r = 0.5 + std::abs(u(rng));
    bool clear = true;
    std::size_t inside = 0;
    for (cplx l : ev) {
      if (std::abs(std::abs(l - c) - r) < 0.1) clear = false;
      if (std::abs(l - c) < r) ++inside;
    }
    if (!clear) continue;
    auto res = contour_rank(m, c, r, 256);
    CHECK(res.rank == inside);
    ++checked;
  }
}

TEST_CASE("contour_rank is stable under doubling the quadrature") {
  std::mt19937_64 rng(99);
  auto m = random_matrix(8, rng);
  const auto ev = eigenvalues(m);
  const cplx c = ev[3];
  double r = INFINITY;
  for (std::size_t k = 0; k < ev.size(); ++k)
    if (k != 3) r = std::min(r, 0.5 * std::abs(ev[k] - c));
  auto p64 = contour_rank(m, c, r, 64);
  auto p128 = contour_rank(m, c, r, 128);
  auto p256 = contour_rank(m, c, r, 256);
  CHECK(p64.rank == p128.rank);
  CHECK(p128.rank == p256.rank);
  CHECK((*p128.projection - *p256.projection).max_abs() <= 1e-8);
}

TEST_CASE("sketched contour_rank on larger sections") {
  std::vector<cplx> d;
  for (int k = 0; k < 300; ++k) d.push_back(cplx(0.1 * k, 0.0));
  auto m = ComplexMatrix::diagonal(d);
  for (std::size_t i = 0; i + 1 < 300; ++i) m(i, i + 1) = 0.05;
  auto one = contour_rank(m, cplx(5.0, 0.0), 0.05);
  CHECK(!one.projection);
  CHECK(one.rank == 1);
  auto many = contour_rank(m, cplx(5.0, 0.0), 1.52);
  CHECK(many.rank == 31);  // 3.5 .. 6.5 inclusive at spacing 0.1
  auto none = contour_rank(m, cplx(-5.0, 0.0), 1.0);
  CHECK(none.rank == 0);
}
