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

// A complex function of one real variable with its derivative.
class Coefficient {
 public:
  Coefficient();  // identically zero
  Coefficient(std::string name, std::function<cplx(double)> value,
              std::function<cplx(double)> derivative);

  static Coefficient constant(cplx c);
  // Sums of products of numbers, "pi", "i", "x^k" (real k) and parenthesized
  // sums, e.g. "x^2", "i*x^2", "2 - 0.5*x^-2", "(1 + x)*x". Powers apply to x
  // only. Throws ArgumentError on bad syntax.
  static Coefficient parse(const std::string& expr);
  // Linear interpolation; CoefficientError outside [xs.front(), xs.back()].
  static Coefficient table(std::vector<double> xs, std::vector<cplx> values);

  cplx operator()(double x) const { return value_(x); }
  cplx derivative(double x) const { return derivative_(x); }
  const std::string& name() const noexcept { return name_; }
  Coefficient conjugated() const;

 private:
  std::string name_;
  std::function<cplx(double)> value_;
  std::function<cplx(double)> derivative_;
};

struct SLProblem {
  Coefficient p;  // real-valued, positive
  Coefficient q;  // real-valued
  double a = 0.0;
  double b = 1.0;
  double beta = 0.0;              // Robin parameter in [0, pi)
  std::vector<double> a_n;        // truncation points, decreasing toward a
  double p_min = 0.0;
  double q_min = -std::numeric_limits<double>::infinity();
};

struct SLMatrixProblem {
  SLProblem tau1;
  SLProblem tau2;
  cplx gamma1 = 1.0;
  cplx gamma2 = 1.0;
  Coefficient s, t, u, v;
  double s_sup = 0.0, t_sup = 0.0, u_sup = 0.0, v_sup = 0.0;  // declared sup norms
};

struct SchrodingerConstantsDecl {
  std::optional<double> a_grad, b_grad, a_r, b_r;
};

struct SchrodingerProblem {
  Coefficient p;  // first-order coefficient
  Coefficient q;  // Re q >= 0, |q| -> infinity
  Coefficient r;  // relatively bounded remainder
  std::vector<double> half_widths;  // L_n, increasing
  SchrodingerConstantsDecl declared;
};

// Number of unknowns for m grid intervals (m - 1 for Dirichlet at b, else m).
std::size_t sl_unknowns(const SLProblem& prob, std::size_t m);

// Finite differences on x_i = a_n + i h, h = (b - a_n) / m. n is 1-based
// into prob.a_n. With beta != 0 the last unknown sits at b and the Robin
// condition enters through a ghost node, using p(b + h/2) ~ 2 p(b) - p(b - h/2)
// so that p is never sampled past b.
SectionMatrix sl_assemble(const SLProblem& prob, std::size_t n, std::size_t m);

// Diagonal d with diag(d)^{1/2} M diag(d)^{-1/2} symmetric for M = sl_assemble.
std::vector<double> sl_symmetrizer(const SLProblem& prob, std::size_t n, std::size_t m);

// [g1 T1, diag(s) T2 + diag(t); diag(u) T1 + diag(v), g2 T2] on a common grid.
SectionMatrix sl_block_assemble(const SLMatrixProblem& prob, std::size_t n, std::size_t m);

struct AssumptionAudit {
  double a_grad = 0.0, b_grad = 0.0, a_r = 0.0, b_r = 0.0;
  bool grad_declared = false, r_declared = false;
  double violation_fraction = 0.0;  // of audit nodes, for declared constants
  double worst_location = 0.0;
  std::size_t points = 0;
  double half_width = 0.0;
};

// Checks |q'|^2 <= a_grad + b_grad |q|^2 and |r|^2 <= a_r + b_r |q|^2 on a
// uniform grid of `points` nodes in [-L, L]. Undeclared pairs are fitted by
// least squares and then a is raised until the bound holds on the grid.
// AssumptionError when a declared b_r >= 1.
AssumptionAudit audit_schrodinger(const SchrodingerProblem& prob, double half_width,
                                  std::size_t points = 10000);

// Central differences on (-L_n, L_n), Dirichlet at both ends, m intervals.
// AssumptionError when declared constants fail at more than 0.1% of the
// audit nodes or when a declared b_r >= 1.
SectionMatrix schrodinger_assemble(const SchrodingerProblem& prob, std::size_t n, std::size_t m);

}  // namespace specexact
