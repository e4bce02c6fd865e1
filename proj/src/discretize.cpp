#include "specexact/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "specexact/errors.hpp"

namespace specexact {

namespace {

constexpr double kPi = std::numbers::pi;

double real_value(const Coefficient& c, double x, const char* what) {
  const cplx v = c(x);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw CoefficientError(std::string(what) + " is not finite at x = " + std::to_string(x), x);
  if (v.imag() != 0.0)
    throw CoefficientError(std::string(what) + " must be real-valued, fails at x = " +
                               std::to_string(x),
                           x);
  return v.real();
}

cplx finite_value(const Coefficient& c, double x, const char* what) {
  const cplx v = c(x);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw CoefficientError(std::string(what) + " is not finite at x = " + std::to_string(x), x);
  return v;
}

double truncation_point(const SLProblem& prob, std::size_t n) {
  if (n == 0 || n > prob.a_n.size())
    throw ArgumentError("truncation index " + std::to_string(n) + " outside 1.." +
                        std::to_string(prob.a_n.size()));
  const double an = prob.a_n[n - 1];
  if (!(an >= prob.a && an < prob.b))
    throw ArgumentError("truncation point a_n = " + std::to_string(an) + " not in [a, b)");
  return an;
}

void check_sl(const SLProblem& prob, std::size_t m) {
  if (m < 2) throw ArgumentError("sl_assemble: need at least 2 grid intervals");
  if (!(prob.beta >= 0.0 && prob.beta < kPi))
    throw ArgumentError("Robin parameter beta = " + std::to_string(prob.beta) +
                        " outside [0, pi)");
  if (!(prob.a < prob.b)) throw ArgumentError("SL interval needs a < b");
}

struct SlStencil {
  std::vector<double> diag, lower, upper;  // lower[i] couples i to i-1, upper[i] to i+1
  std::vector<double> nodes;
  double p_minus = 0.0, p_plus = 0.0;      // staggered p at the Robin row
};

SlStencil sl_stencil(const SLProblem& prob, std::size_t n, std::size_t m) {
  check_sl(prob, m);
  const double an = truncation_point(prob, n);
  const double h = (prob.b - an) / static_cast<double>(m);
  const bool robin = prob.beta != 0.0;
  const std::size_t k = robin ? m : m - 1;
  SlStencil st;
  st.diag.resize(k);
  st.lower.assign(k, 0.0);
  st.upper.assign(k, 0.0);
  st.nodes.resize(k);
  const double h2 = h * h;

  auto p_at = [&](double x) {
    const double v = real_value(prob.p, x, "p");
    if (!(v > 0.0)) throw CoefficientError("p is not positive at x = " + std::to_string(x), x);
    if (v < prob.p_min)
      throw CoefficientError("p falls below the declared p_min at x = " + std::to_string(x), x);
    return v;
  };
  auto q_at = [&](double x) {
    const double v = real_value(prob.q, x, "q");
    if (v < prob.q_min)
      throw CoefficientError("q falls below the declared q_min at x = " + std::to_string(x), x);
    return v;
  };

  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = r + 1;  // grid index
    const double x = an + static_cast<double>(i) * h;
    st.nodes[r] = (i == m) ? prob.b : x;
    // Half-node abscissae written so neighbouring rows share the exact value.
    const double pm = p_at(an + (static_cast<double>(i) - 0.5) * h);
    if (i == m) {
      // Robin row: ghost f_{m+1} = f_{m-1} + (2 h cot(beta) / p(b)) f_m.
      const double pb = p_at(prob.b);
      const double pp = 2.0 * pb - pm;
      const double c = 2.0 * h * std::cos(prob.beta) / (std::sin(prob.beta) * pb);
      st.p_minus = pm;
      st.p_plus = pp;
      st.diag[r] = (pp + pm - pp * c) / h2 + q_at(prob.b);
      st.lower[r] = -(pp + pm) / h2;
    } else {
      const double pp = p_at(an + (static_cast<double>(i) + 0.5) * h);
      st.diag[r] = (pp + pm) / h2 + q_at(x);
      if (r > 0) st.lower[r] = -pm / h2;
      if (r + 1 < k) st.upper[r] = -pp / h2;
    }
  }
  return st;
}

ComplexMatrix stencil_matrix(const SlStencil& st) {
  const std::size_t k = st.diag.size();
  ComplexMatrix t(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    t(r, r) = st.diag[r];
    if (r > 0) t(r, r - 1) = st.lower[r];
    if (r + 1 < k) t(r, r + 1) = st.upper[r];
  }
  return t;
}

}  // namespace

std::size_t sl_unknowns(const SLProblem& prob, std::size_t m) {
  return prob.beta != 0.0 ? m : m - 1;
}

SectionMatrix sl_assemble(const SLProblem& prob, std::size_t n, std::size_t m) {
  auto st = sl_stencil(prob, n, m);
  SectionMatrix out;
  out.matrix = stencil_matrix(st);
  out.provenance = {"sl", "sl_fd", m, st.nodes};
  return out;
}

std::vector<double> sl_symmetrizer(const SLProblem& prob, std::size_t n, std::size_t m) {
  auto st = sl_stencil(prob, n, m);
  std::vector<double> d(st.diag.size(), 1.0);
  if (prob.beta != 0.0 && d.size() >= 2) d.back() = st.p_minus / (st.p_plus + st.p_minus);
  return d;
}

SectionMatrix sl_block_assemble(const SLMatrixProblem& prob, std::size_t n, std::size_t m) {
  if (prob.gamma1 == cplx{} || prob.gamma2 == cplx{})
    throw ArgumentError("sl_block_assemble: gamma1 and gamma2 must be nonzero");
  if (!(prob.s_sup * prob.u_sup < std::abs(prob.gamma1) * std::abs(prob.gamma2)))
    throw ArgumentError("sl_block_assemble: |s|_inf |u|_inf must be below |gamma1| |gamma2|");
  const double an1 = truncation_point(prob.tau1, n);
  const double an2 = truncation_point(prob.tau2, n);
  const std::size_t k1 = sl_unknowns(prob.tau1, m), k2 = sl_unknowns(prob.tau2, m);
  if (an1 != an2 || prob.tau1.b != prob.tau2.b || k1 != k2)
    throw ArgumentError("sl_block_assemble: components must share one grid (same a_n, b and "
                        "boundary type)");
  auto t1 = sl_assemble(prob.tau1, n, m);
  auto t2 = sl_assemble(prob.tau2, n, m);
  const auto& nodes = *t1.provenance.grid;
  const std::size_t k = k1;

  ComplexMatrix a(2 * k, 2 * k);
  a.set_block(0, 0, prob.gamma1 * t1.matrix);
  a.set_block(k, k, prob.gamma2 * t2.matrix);
  for (std::size_t i = 0; i < k; ++i) {
    const double x = nodes[i];
    const cplx s = finite_value(prob.s, x, "s"), t = finite_value(prob.t, x, "t");
    const cplx u = finite_value(prob.u, x, "u"), v = finite_value(prob.v, x, "v");
    for (std::size_t j = 0; j < k; ++j) {
      a(i, k + j) = s * t2.matrix(i, j);
      a(k + i, j) = u * t1.matrix(i, j);
    }
    a(i, k + i) += t;
    a(k + i, i) += v;
  }
  SectionMatrix out;
  out.matrix = std::move(a);
  out.provenance = {"sl_matrix", "sl_fd_block", m, nodes};
  return out;
}

AssumptionAudit audit_schrodinger(const SchrodingerProblem& prob, double half_width,
                                  std::size_t points) {
  if (points < 2) throw ArgumentError("audit needs at least 2 points");
  const auto& d = prob.declared;
  if (d.b_r && *d.b_r >= 1.0)
    throw AssumptionError("declared b_r = " + std::to_string(*d.b_r) + " must be below 1");
  AssumptionAudit out;
  out.points = points;
  out.half_width = half_width;
  std::vector<double> xs(points), g2(points), r2(points), q2(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = -half_width + 2.0 * half_width * static_cast<double>(k) /
                                       static_cast<double>(points - 1);
    xs[k] = x;
    const cplx q = finite_value(prob.q, x, "q");
    const cplx dq = prob.q.derivative(x);
    const cplx r = finite_value(prob.r, x, "r");
    q2[k] = std::norm(q);
    g2[k] = std::norm(dq);
    r2[k] = std::norm(r);
  }

  // Least-squares line y ~ a + b w with a, b >= 0, then a raised to cover y.
  auto fit = [&](const std::vector<double>& y) {
    const double n = static_cast<double>(points);
    double sw = 0, sy = 0, sww = 0, swy = 0;
    for (std::size_t k = 0; k < points; ++k) {
      sw += q2[k];
      sy += y[k];
      sww += q2[k] * q2[k];
      swy += q2[k] * y[k];
    }
    const double det = n * sww - sw * sw;
    double b = det > 0.0 ? (n * swy - sw * sy) / det : 0.0;
    b = std::max(b, 0.0);
    double a = 0.0;
    for (std::size_t k = 0; k < points; ++k) a = std::max(a, y[k] - b * q2[k]);
    return std::pair{a, b};
  };

  std::size_t bad = 0;
  double worst = 0.0;
  auto check = [&](const std::vector<double>& y, double a, double b) {
    for (std::size_t k = 0; k < points; ++k) {
      const double excess = y[k] - (a + b * q2[k]);
      const double tol = 1e-12 * std::max(1.0, std::abs(y[k]));
      if (excess > tol) {
        ++bad;
        if (excess > worst) {
          worst = excess;
          out.worst_location = xs[k];
        }
      }
    }
  };

  if (d.a_grad && d.b_grad) {
    out.grad_declared = true;
    out.a_grad = *d.a_grad;
    out.b_grad = *d.b_grad;
    check(g2, out.a_grad, out.b_grad);
  } else {
    std::tie(out.a_grad, out.b_grad) = fit(g2);
  }
  if (d.a_r && d.b_r) {
    out.r_declared = true;
    out.a_r = *d.a_r;
    out.b_r = *d.b_r;
    check(r2, out.a_r, out.b_r);
  } else {
    std::tie(out.a_r, out.b_r) = fit(r2);
  }
  out.violation_fraction = static_cast<double>(bad) / static_cast<double>(points);
  return out;
}

SectionMatrix schrodinger_assemble(const SchrodingerProblem& prob, std::size_t n, std::size_t m) {
  if (m < 4) throw ArgumentError("schrodinger_assemble: need at least 4 grid intervals");
  if (n == 0 || n > prob.half_widths.size())
    throw ArgumentError("truncation index " + std::to_string(n) + " outside 1.." +
                        std::to_string(prob.half_widths.size()));
  const double L = prob.half_widths[n - 1];
  if (!(L > 0.0)) throw ArgumentError("half width must be positive");

  const auto audit = audit_schrodinger(prob, L);
  if (audit.violation_fraction > 1e-3)
    throw AssumptionError("declared constants violated at " +
                              std::to_string(audit.violation_fraction * 100.0) +
                              "% of audit nodes, worst at x = " +
                              std::to_string(audit.worst_location),
                          audit.worst_location);

  const double h = 2.0 * L / static_cast<double>(m);
  const std::size_t k = m - 1;
  ComplexMatrix a(k, k);
  std::vector<double> nodes(k);
  const double h2 = h * h;
  for (std::size_t r = 0; r < k; ++r) {
    const double x = -L + static_cast<double>(r + 1) * h;
    nodes[r] = x;
    const cplx p = finite_value(prob.p, x, "p");
    const cplx v = finite_value(prob.q, x, "q") + finite_value(prob.r, x, "r");
    a(r, r) = 2.0 / h2 + v;
    if (r > 0) a(r, r - 1) = -1.0 / h2 - p / (2.0 * h);
    if (r + 1 < k) a(r, r + 1) = -1.0 / h2 + p / (2.0 * h);
  }
  SectionMatrix out;
  out.matrix = std::move(a);
  out.provenance = {"schrodinger", "schrodinger_fd", m, nodes};
  return out;
}

}  // namespace specexact
