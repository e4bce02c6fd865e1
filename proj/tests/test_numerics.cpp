#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"

using namespace specexact;

namespace {

ComplexMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
  auto a = random_matrix(n, rng);
  return 0.5 * (a + a.adjoint());
}

// Finite section of the Jacobi matrix with zero diagonal and off-diagonal
// entries alternating k+1 (k odd) and k/2 (k even), k starting at 1.
ComplexMatrix jacobi_section(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t k = 1; k < n; ++k) {
    const double q = (k % 2 == 1) ? static_cast<double>(k + 1) : 0.5 * static_cast<double>(k);
    m(k - 1, k) = q;
    m(k, k - 1) = q;
  }
  return m;
}

// Greedy matching distance between two multisets of equal size.
double match_distance(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0.0;
  for (const auto& z : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](cplx x, cplx y) { return std::abs(x - z) < std::abs(y - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST_CASE("eig_dense on small examples") {
  auto e = eig_dense(ComplexMatrix::from_rows({{0, 2}, {2, 0}}));
  REQUIRE(e.eigenvalues.size() == 2);
  CHECK(std::abs(e.eigenvalues[0] - cplx(-2)) < 1e-14);
  CHECK(std::abs(e.eigenvalues[1] - cplx(2)) < 1e-14);
  CHECK(e.clusters.size() == 2);

  auto id = eig_dense(ComplexMatrix::identity(3));
  REQUIRE(id.clusters.size() == 1);
  CHECK(id.clusters[0].size() == 3);
  CHECK(std::abs(id.clusters[0].center - cplx(1)) < 1e-15);

  auto jb = eig_dense(ComplexMatrix::from_rows({{0, 1}, {0, 0}}));
  REQUIRE(jb.clusters.size() == 1);
  CHECK(jb.clusters[0].size() == 2);
  CHECK(std::abs(jb.clusters[0].center) < 1e-12);
}

TEST_CASE("eig_dense rejects bad shapes") {
  CHECK_THROWS_AS(eig_dense(ComplexMatrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(eig_dense(ComplexMatrix()), DimensionError);
  CHECK_THROWS_AS(sigma_min(ComplexMatrix(3, 2)), DimensionError);
}

TEST_CASE("eig_dense is deterministic and sorted") {
  std::mt19937_64 rng(7);
  auto m = random_matrix(30, rng);
  auto a = eig_dense(m);
  auto b = eig_dense(m);
  CHECK(a.eigenvalues == b.eigenvalues);
  for (std::size_t k = 1; k < a.eigenvalues.size(); ++k) {
    const auto& p = a.eigenvalues[k - 1];
    const auto& q = a.eigenvalues[k];
    CHECK((p.real() < q.real() || (p.real() == q.real() && p.imag() <= q.imag())));
  }
  std::size_t total = 0;
  for (const auto& c : a.clusters) total += c.size();
  CHECK(total == 30);
}

TEST_CASE("residuals of returned eigenvectors are small") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {5u, 17u, 40u, 80u}) {
    auto m = random_matrix(n, rng);
    auto e = eig_dense(m, {.residuals = true, .eigenvectors = true});
    REQUIRE(e.residual_kind == ResidualKind::kEigenvector);
    REQUIRE(e.eigenvectors.has_value());
    const double nm = norm_bound(m);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<cplx> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (*e.eigenvectors)(i, k);
      auto mv = m * std::span<const cplx>(v);
      for (std::size_t i = 0; i < n; ++i) mv[i] -= e.eigenvalues[k] * v[i];
      CHECK(vector_norm(mv) <= 1e-8 * nm * vector_norm(v));
      CHECK(e.residuals[k] <= 1e-8 * nm);
    }
  }
}

TEST_CASE("eigenvalues satisfy the characteristic trace identities") {
  std::mt19937_64 rng(3);
  auto m = random_matrix(25, rng);
  auto ev = eigenvalues(m);
  cplx tr{}, sum{};
  for (std::size_t i = 0; i < 25; ++i) tr += m(i, i);
  for (auto z : ev) sum += z;
  CHECK(std::abs(tr - sum) < 1e-10 * norm_bound(m));
}

TEST_CASE("Hermitian spectra are real and match sigma_min of shifts") {
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 3 + seed % 20;
    auto h = random_hermitian(n, rng);
    auto e = eig_dense(h);
    const double nm = norm_bound(h);
    for (auto z : e.eigenvalues) CHECK(std::abs(z.imag()) <= 1e-10 * nm);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const cplx lambda(u(rng), 0.3 * u(rng));
    double dist = INFINITY;
    for (auto z : e.eigenvalues) dist = std::min(dist, std::abs(lambda - z));
    const double s = sigma_min(h.shifted(lambda));
    CHECK(std::abs(s - dist) <= 1e-8 * std::max(dist, 1.0));
  }
}

TEST_CASE("spectrum of the adjoint is the conjugate spectrum") {
  std::mt19937_64 rng(21);
  for (std::size_t n : {4u, 12u, 33u}) {
    auto m = random_matrix(n, rng);
    auto a = eigenvalues(m);
    auto b = eigenvalues(m.adjoint());
    for (auto& z : b) z = std::conj(z);
    CHECK(match_distance(a, b) < 1e-8 * norm_bound(m));
  }
}

TEST_CASE("complex symmetric tridiagonal path") {
  // Complex harmonic-oscillator style matrix; compare with the general path
  // by perturbing symmetry with an exact zero pattern change.
  const std::size_t n = 60;
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = cplx(2.0 + 0.01 * static_cast<double>(i * i), 0.5 * static_cast<double>(i));
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = cplx(-1.0, 0.2);
  }
  auto fast = eigenvalues(m);
  ComplexMatrix g = m;
  g(0, n - 1) = 1e-300;  // breaks the tridiagonal pattern, forces Hessenberg QR
  auto slow = eigenvalues(g);
  CHECK(match_distance(fast, slow) < 1e-8 * norm_bound(m));
}

TEST_CASE("Jacobi sections: zero eigenvalue for odd sizes, gap for even sizes") {
  // min |eig| for even sections, frozen from an independent dense solver.
  const double expected[] = {2.0, 1.9233472764, 1.9117291023};
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t n = 2 + 2 * k;
    auto ev = eigenvalues(jacobi_section(n));
    double mn = INFINITY;
    for (auto z : ev) mn = std::min(mn, std::abs(z));
    CHECK(mn == doctest::Approx(expected[k]).epsilon(1e-6));
  }
  for (std::size_t n : {3u, 11u, 41u}) {
    auto ev = eigenvalues(jacobi_section(n));
    double mn = INFINITY;
    for (auto z : ev) mn = std::min(mn, std::abs(z));
    CHECK(mn < 1e-12);
    CHECK(sigma_min(jacobi_section(n)) == 0.0);
  }
}

TEST_CASE("sigma_min examples and probe bound") {
  CHECK(sigma_min(ComplexMatrix::identity(4)) == doctest::Approx(1.0));
  CHECK(sigma_min(ComplexMatrix::from_rows({{0, 2}, {2, 0}})) == doctest::Approx(2.0));
  CHECK(sigma_min(ComplexMatrix::diagonal({1.0, 10.0})) == doctest::Approx(1.0));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (std::size_t n : {6u, 50u, 130u}) {
    auto m = random_matrix(n, rng);
    const double s = sigma_min(m);
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<cplx> x(n);
      for (auto& v : x) v = cplx(g(rng), g(rng));
      const double nx = vector_norm(x);
      for (auto& v : x) v /= nx;
      CHECK(s <= vector_norm(m * std::span<const cplx>(x)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("large-n sigma_min and op_norm agree with the Jacobi SVD") {
  std::mt19937_64 rng(9);
  const std::size_t n = 140;
  ComplexMatrix m(n, n);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > 2 ? i - 2 : 0); j < std::min(n, i + 3); ++j)
      m(i, j) = cplx(g(rng), g(rng));
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 6.0;
  auto sv = singular_values(m);
  CHECK(sigma_min(m) == doctest::Approx(sv.back()).epsilon(1e-10));
  CHECK(op_norm(m) == doctest::Approx(sv.front()).epsilon(1e-10));
}

TEST_CASE("op_norm examples") {
  CHECK(op_norm(ComplexMatrix::diagonal({3.0, 1.0})) == doctest::Approx(3.0));
  CHECK(op_norm(ComplexMatrix(3, 3)) == 0.0);
  CHECK(op_norm(ComplexMatrix::from_rows({{0, 5}, {0, 0}})) == doctest::Approx(5.0));
  CHECK(op_norm(ComplexMatrix::from_rows({{3, 4, 0}})) == doctest::Approx(5.0));
}

TEST_CASE("solve examples, round trip and singularity") {
  auto b = ComplexMatrix::from_rows({{1, 2}, {cplx(0, 1), -3}});
  CHECK(solve(ComplexMatrix::identity(2), b) == b);
  auto x = solve(ComplexMatrix::diagonal({2.0, 4.0}), ComplexMatrix::identity(2));
  CHECK(std::abs(x(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(x(1, 1) - 0.25) < 1e-15);
  auto p = solve(ComplexMatrix::from_rows({{0, 2}, {2, 0}}), ComplexMatrix::identity(2));
  CHECK(std::abs(p(0, 1) - 0.5) < 1e-15);
  CHECK(std::abs(p(1, 0) - 0.5) < 1e-15);
  CHECK(std::abs(p(0, 0)) < 1e-15);

  std::mt19937_64 rng(13);
  for (std::size_t n : {3u, 20u, 64u}) {
    auto m = random_matrix(n, rng);
    auto rhs = random_matrix(n, rng);
    auto sol = solve(m, rhs);
    auto r = m * sol - rhs;
    CHECK(r.frobenius_norm() <= 1e-9 * norm_bound(m) * rhs.frobenius_norm());
  }

  try {
    solve(ComplexMatrix::from_rows({{1, 1}, {1, 1}}), ComplexMatrix::identity(2));
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.pivot() < 1e-14);
  }
}

TEST_CASE("banded LU matches dense solve and adjoint solve") {
  const std::size_t n = 300;
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = cplx(4.0 + 0.01 * static_cast<double>(i), 0.3);
    if (i + 1 < n) m(i, i + 1) = cplx(2.0, -0.5);
    if (i > 0) m(i, i - 1) = 0.7;
  }
  LuFactor lu(m);
  CHECK(lu.banded());
  std::vector<cplx> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = cplx(std::sin(double(i)), std::cos(3.0 * i));
  auto x = lu.solve(rhs);
  auto r = m * std::span<const cplx>(x);
  for (std::size_t i = 0; i < n; ++i) r[i] -= rhs[i];
  CHECK(vector_norm(r) < 1e-9 * vector_norm(rhs) * norm_bound(m));
  auto y = lu.solve_adjoint(rhs);
  auto ra = m.adjoint() * std::span<const cplx>(y);
  for (std::size_t i = 0; i < n; ++i) ra[i] -= rhs[i];
  CHECK(vector_norm(ra) < 1e-9 * vector_norm(rhs) * norm_bound(m));
}

TEST_CASE("clustering merges chains within the radius") {
  std::vector<cplx> z = {0.0, 0.5, 1.0, 5.0};
  auto c = cluster_eigenvalues(z, 0.6);
  REQUIRE(c.size() == 2);
  CHECK(c[0].size() == 3);
  CHECK(c[1].size() == 1);
  CHECK(multiplicity_radius(0.0) == 1e-10);
  CHECK(multiplicity_radius(1e4) == doctest::Approx(1e-4));
}
