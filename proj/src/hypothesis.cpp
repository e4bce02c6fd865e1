#include "specexact/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "specexact/errors.hpp"
#include "specexact/numerics.hpp"
#include "specexact/parallel.hpp"

namespace specexact {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kExplicitLimit = 96;

std::vector<cplx> adjoint_times(const ComplexMatrix& x, std::span<const cplx> w) {
  std::vector<cplx> out(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const cplx wi = w[i];
    if (wi == cplx{}) continue;
    for (std::size_t j = 0; j < x.cols(); ++j) out[j] += std::conj(x(i, j)) * wi;
  }
  return out;
}

double head_third_max(const std::vector<double>& v) {
  const std::size_t k = std::max<std::size_t>(1, v.size() / 3);
  return *std::max_element(v.begin(), v.begin() + static_cast<long>(k));
}

}  // namespace

const char* to_string(TheoremTag t) noexcept {
  switch (t) {
    case TheoremTag::kPerturbGSR: return "PerturbGSR";
    case TheoremTag::kPerturbDiscComp: return "PerturbDiscComp";
    case TheoremTag::kTwoByTwo: return "TwoByTwo";
    case TheoremTag::kDiagonalDecay: return "DiagonalDecay";
    case TheoremTag::kBandedCase: return "BandedCase";
    case TheoremTag::kSLMatrix: return "SLMatrix";
    case TheoremTag::kSchrodinger: return "Schrodinger";
    case TheoremTag::kGalerkin: return "Galerkin";
  }
  return "?";
}

const char* to_string(Evidence e) noexcept {
  switch (e) {
    case Evidence::kPass: return "PassEvidence";
    case Evidence::kFail: return "FailEvidence";
    case Evidence::kInconclusive: return "Inconclusive";
  }
  return "?";
}

void HypothesisReport::set(const std::string& name, double value) {
  for (auto& [k, v] : constants)
    if (k == name) {
      v = value;
      return;
    }
  constants.emplace_back(name, value);
}

double HypothesisReport::constant(const std::string& name) const {
  for (const auto& [k, v] : constants)
    if (k == name) return v;
  throw ArgumentError("hypothesis report has no constant '" + name + "'");
}

bool HypothesisReport::has(const std::string& name) const {
  return std::any_of(constants.begin(), constants.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

double relative_norm(const ComplexMatrix& x, const ComplexMatrix& y, cplx lambda,
                     std::size_t index) {
  if (!y.is_square() || x.cols() != y.rows())
    throw DimensionError("relative_norm: need X (r x n) and square Y (n x n)");
  const double floor = 1e-12 * std::max(norm_bound(y), std::numeric_limits<double>::min());
  const ComplexMatrix shifted = y.shifted(lambda);
  if (sigma_min(shifted) <= floor)
    throw PoleError("lambda is an eigenvalue of section " + std::to_string(index), index);
  if (x.rows() == 0) return 0.0;
  const LuFactor lu(shifted);
  const std::size_t n = y.rows();
  if (n <= kExplicitLimit && x.rows() <= kExplicitLimit) {
    const ComplexMatrix z = x * lu.solve(ComplexMatrix::identity(n));
    return singular_values(z).front();
  }
  return largest_singular_value(
      x.rows(), n, [&](std::span<const cplx> v) { return x * lu.solve(v); },
      [&](std::span<const cplx> w) { return lu.solve_adjoint(adjoint_times(x, w)); });
}

HypothesisReport relative_bound(const SectionBuilder& t_sections, const SectionBuilder& s_sections,
                                cplx lambda, const std::vector<std::size_t>& sizes,
                                TheoremTag tag, double margin) {
  if (sizes.empty()) throw ArgumentError("relative_bound: empty ladder");
  HypothesisReport rep;
  rep.tag = tag;
  rep.lambda = lambda;
  rep.sizes = sizes;
  std::vector<double> gamma(sizes.size()), t_min(sizes.size()), a_min(sizes.size()),
      neumann(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t k) {
    const ComplexMatrix t = t_sections(sizes[k]);
    const ComplexMatrix s = s_sections(sizes[k]);
    if (s.rows() != t.rows() || s.cols() != t.cols())
      throw DimensionError("relative_bound: T and S sections differ in shape at size " +
                           std::to_string(sizes[k]));
    gamma[k] = relative_norm(s, t, lambda, sizes[k]);
    t_min[k] = sigma_min(t.shifted(lambda));
    a_min[k] = sigma_min((t + s).shifted(lambda));
    // 1 when the Neumann consequence holds (only asserted for gamma < 1)
    neumann[k] = gamma[k] >= 1.0 || a_min[k] >= (1.0 - gamma[k]) * t_min[k] - 1e-10 ? 1.0 : 0.0;
  });
  const double sup = *std::max_element(gamma.begin(), gamma.end());
  rep.set("gamma_lambda", sup);
  rep.set("gamma_first", gamma.front());
  rep.set("gamma_last", gamma.back());
  rep.set("margin", margin);
  rep.evidence["gamma_n"] = gamma;
  rep.evidence["sigma_min_T"] = t_min;
  rep.evidence["sigma_min_A"] = a_min;
  rep.evidence["neumann_holds"] = neumann;
  if (sup <= 1.0 - margin)
    rep.verdict = Evidence::kPass;
  else if (sup >= 1.0)
    rep.verdict = Evidence::kFail;
  else
    rep.verdict = Evidence::kInconclusive;
  rep.notes.push_back("sup over the computed ladder only");
  return rep;
}

HypothesisReport gamma_product_2x2(const BlockBuilder& blocks, cplx lambda,
                                   const std::vector<std::size_t>& sizes, double margin) {
  if (sizes.empty()) throw ArgumentError("gamma_product_2x2: empty ladder");
  HypothesisReport rep;
  rep.tag = TheoremTag::kTwoByTwo;
  rep.lambda = lambda;
  rep.sizes = sizes;
  std::vector<double> ac(sizes.size()), db(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t k) {
    const BlockSections b = blocks(sizes[k]);
    ac[k] = relative_norm(b.c, b.a, lambda, sizes[k]);
    db[k] = relative_norm(b.b, b.d, lambda, sizes[k]);
  });
  const double g_ac = *std::max_element(ac.begin(), ac.end());
  const double g_db = *std::max_element(db.begin(), db.end());
  rep.set("gamma_AC", g_ac);
  rep.set("gamma_DB", g_db);
  rep.set("product", g_ac * g_db);
  rep.set("margin", margin);
  rep.evidence["gamma_AC_n"] = ac;
  rep.evidence["gamma_DB_n"] = db;
  const double p = g_ac * g_db;
  rep.verdict = p <= 1.0 - margin ? Evidence::kPass
                : p >= 1.0       ? Evidence::kFail
                                 : Evidence::kInconclusive;
  rep.notes.push_back("sup over the computed ladder only");
  return rep;
}

BlockSections sl_matrix_blocks(const SLMatrixProblem& prob, std::size_t n, std::size_t m) {
  const ComplexMatrix full = sl_block_assemble(prob, n, m).matrix;
  const std::size_t h = full.rows() / 2;
  return {full.block(0, 0, h, h), full.block(0, h, h, h), full.block(h, 0, h, h),
          full.block(h, h, h, h)};
}

HypothesisReport uniform_resolvent_decay(const BlockFamily& block, cplx lambda,
                                         const std::vector<std::size_t>& js,
                                         const std::vector<std::size_t>& ns, TheoremTag tag) {
  if (js.size() < 3 || ns.empty())
    throw ArgumentError("uniform_resolvent_decay: need at least 3 blocks and one size");
  HypothesisReport rep;
  rep.tag = tag;
  rep.lambda = lambda;
  rep.sizes = js;
  std::vector<double> d(js.size(), 0.0);
  parallel_for(js.size(), [&](std::size_t k) {
    double worst = 0.0;
    for (std::size_t n : ns) {
      const double r = resolvent_norm(block(js[k], n), lambda);
      if (std::isinf(r))
        throw PoleError("lambda is an eigenvalue of block " + std::to_string(js[k]), js[k]);
      worst = std::max(worst, r);
    }
    d[k] = worst;
  });
  std::vector<double> rev(d.rbegin(), d.rend());
  const double head = head_third_max(d);
  const double tail_max = head_third_max(rev);
  const std::size_t third = std::max<std::size_t>(1, d.size() / 3);
  const double tail_min = *std::min_element(d.end() - static_cast<long>(third), d.end());
  const double factor = tail_max > 0.0 ? head / tail_max : kInf;
  rep.set("head_max", head);
  rep.set("tail_max", tail_max);
  rep.set("tail_min", tail_min);
  rep.set("decay_factor", factor);
  rep.evidence["d_j"] = d;
  if (factor >= 2.0 && tail_min < 0.1 * head)
    rep.verdict = Evidence::kPass;
  else if (factor < 2.0)
    rep.verdict = Evidence::kFail;
  else
    rep.verdict = Evidence::kInconclusive;
  rep.notes.push_back("sup over the scanned sizes only");
  return rep;
}

HypothesisReport banded_case(const OperatorSpec& spec, std::size_t scan_limit, cplx lambda) {
  const BandProfile bp = band_profile(spec, scan_limit, lambda, true);
  HypothesisReport rep;
  rep.tag = TheoremTag::kBandedCase;
  rep.lambda = lambda;
  for (std::size_t i = 1; i <= scan_limit; ++i) rep.sizes.push_back(i);
  rep.set("N", bp.max_row_count ? double(*bp.max_row_count) : kInf);
  rep.set("M", bp.max_col_count ? double(*bp.max_col_count) : kInf);
  rep.set("row_partial_sum", bp.row_partial_sums.empty() ? 0.0 : bp.row_partial_sums.back());
  rep.set("col_partial_sum", bp.col_partial_sums.empty() ? 0.0 : bp.col_partial_sums.back());
  rep.set("row_tail_ratio", bp.row_tail_ratio);
  rep.set("col_tail_ratio", bp.col_tail_ratio);
  auto counts = [](const std::vector<std::size_t>& c) {
    return std::vector<double>(c.begin(), c.end());
  };
  rep.evidence["row_counts"] = counts(bp.row_counts);
  rep.evidence["col_counts"] = counts(bp.col_counts);
  rep.evidence["row_envelope"] = bp.row_envelope;
  rep.evidence["col_envelope"] = bp.col_envelope;
  rep.evidence["row_partial_sums"] = bp.row_partial_sums;
  rep.evidence["col_partial_sums"] = bp.col_partial_sums;
  rep.verdict = bp.hint == CaseHint::kNone ? Evidence::kInconclusive : Evidence::kPass;
  rep.notes.push_back(std::string("case hint: ") + to_string(bp.hint));
  return rep;
}

double sl_coercivity(double p_min, double q_min, double beta) {
  if (!(p_min > 0.0)) throw ArgumentError("sl_coercivity: p_min must be positive");
  if (!(beta >= 0.0 && beta < std::numbers::pi))
    throw ArgumentError("sl_coercivity: beta must lie in [0, pi)");
  if (beta >= std::numbers::pi / 2) return q_min;
  const double t = std::tan(beta);
  return q_min - 2.0 * t * t / p_min;
}

namespace {

// sup over the line through 0 with unit direction u of |xi| / |xi - z|:
// 10^4 samples on |xi| <= 10 |z| plus the limit 1 at infinity.
double sampled_ratio_sup(cplx u, cplx z) {
  constexpr std::size_t kSamples = 10000;
  const double reach = 10.0 * std::abs(z);
  double best = 1.0;
  for (std::size_t k = 0; k < kSamples; ++k) {
    const double t = -reach + 2.0 * reach * static_cast<double>(k) / double(kSamples - 1);
    const cplx xi = t * u;
    const double den = std::abs(xi - z);
    if (den > 0.0) best = std::max(best, std::abs(xi) / den);
  }
  return best;
}

double line_distance(cplx u, cplx z) { return std::abs((z * std::conj(u)).imag()); }

}  // namespace

Lambda0Search sl_lambda0_search(cplx gamma1, cplx gamma2, double s_sup, double t_sup,
                                double u_sup, double v_sup) {
  const double g1 = std::abs(gamma1), g2 = std::abs(gamma2);
  if (g1 == 0.0 || g2 == 0.0) throw ArgumentError("sl_lambda0_search: gamma must be nonzero");
  if (!(s_sup * u_sup < g1 * g2))
    throw AssumptionError("sl_lambda0_search: need |s| |u| < |gamma1| |gamma2|");

  cplx u1 = gamma1 / g1, u2 = gamma2 / g2;
  if ((u2 * std::conj(u1)).real() < 0.0) u2 = -u2;  // acute angle between directions
  const double phi = std::acos(std::clamp((u2 * std::conj(u1)).real(), -1.0, 1.0));
  const double theta = 0.5 * (std::numbers::pi - phi);
  cplx w = cplx(0.0, 1.0) * (u1 + u2);
  w /= std::abs(w);
  if (w.imag() < 0.0 || (w.imag() == 0.0 && w.real() > 0.0)) w = -w;

  Lambda0Search out;
  HypothesisReport& rep = out.report;
  rep.tag = TheoremTag::kSLMatrix;
  rep.set("theta", theta);
  std::vector<double> eps_grid;
  for (double decade = 1.0; decade >= 1e-8; decade /= 10.0)
    for (double m : {0.5, 0.2, 0.1}) eps_grid.push_back(m * decade);

  double best_product = kInf;
  std::vector<double> products, sups;
  for (double eps : eps_grid) {
    const double radius = std::sqrt(2.0) / (eps * std::sin(theta));
    const cplx z = radius * w;
    const double sup1 = sampled_ratio_sup(u1, z), sup2 = sampled_ratio_sup(u2, z);
    const double d1 = line_distance(u1, z), d2 = line_distance(u2, z);
    const double gam1 = u_sup / g1 * (1.0 + eps) + v_sup * eps;
    const double gam2 = s_sup / g2 * (1.0 + eps) + t_sup * eps;
    const double product = gam1 * gam2;
    products.push_back(product);
    sups.push_back(std::max(sup1, sup2));
    const bool lines_ok = sup1 <= 1.0 + eps && sup2 <= 1.0 + eps && d1 >= 1.0 / eps &&
                          d2 >= 1.0 / eps;
    if (lines_ok) best_product = std::min(best_product, product);
    if (lines_ok && product < 1.0) {
      out.found = true;
      out.eps = eps;
      out.lambda0 = z;
      rep.lambda = z;
      rep.set("eps", eps);
      rep.set("lambda0_re", z.real());
      rep.set("lambda0_im", z.imag());
      rep.set("sup_ratio_1", sup1);
      rep.set("sup_ratio_2", sup2);
      rep.set("dist_1", d1);
      rep.set("dist_2", d2);
      rep.set("gamma_1", gam1);
      rep.set("gamma_2", gam2);
      rep.set("product", product);
      // re-check with the closed form sup = |z| / dist
      const bool audit = std::abs(z) / d1 <= 1.0 + eps + 1e-12 &&
                         std::abs(z) / d2 <= 1.0 + eps + 1e-12 && d1 >= 1.0 / eps &&
                         d2 >= 1.0 / eps && product < 1.0;
      rep.set("audit", audit ? 1.0 : 0.0);
      break;
    }
  }
  rep.evidence["product_by_eps"] = products;
  rep.evidence["sup_ratio_by_eps"] = sups;
  if (out.found) {
    rep.verdict = Evidence::kPass;
  } else {
    rep.verdict = Evidence::kFail;
    rep.set("best_product", best_product);
    rep.notes.push_back("no eps on the grid satisfies all three inequalities");
  }
  return out;
}

SchrodingerKnobs SchrodingerKnobs::standard() {
  SchrodingerKnobs k;
  for (int i = 0; i <= 32; ++i) k.grid.push_back(std::pow(10.0, -4.0 + i / 8.0));
  for (int e = 0; e <= 8; ++e) k.lambda0_magnitudes.push_back(std::pow(10.0, e));
  return k;
}

double schrodinger_gamma(double a, double b, double c_alpha, double alpha, double lambda0_abs) {
  const double g2 = (a + b * c_alpha / (1.0 - alpha)) / (lambda0_abs * lambda0_abs) +
                    b / (1.0 - alpha);
  return std::sqrt(g2);
}

HypothesisReport schrodinger_constants(const SchrodingerProblem& prob,
                                       const SchrodingerKnobs& knobs, std::size_t audit_points) {
  if (prob.half_widths.empty()) throw ArgumentError("schrodinger_constants: no half widths");
  if (prob.declared.b_r && *prob.declared.b_r >= 1.0)
    throw AssumptionError("schrodinger_constants: b_r >= 1, the perturbation argument does not apply");
  const double L = prob.half_widths.back();
  const AssumptionAudit audit = audit_schrodinger(prob, L, audit_points);
  if (audit.b_r >= 1.0)
    throw AssumptionError("schrodinger_constants: fitted b_r >= 1", audit.worst_location);

  double p_sup = 0.0;
  for (std::size_t k = 0; k < audit_points; ++k) {
    const double x = -L + 2.0 * L * static_cast<double>(k) / double(audit_points - 1);
    p_sup = std::max(p_sup, std::abs(prob.p(x)));
  }
  const double p4 = std::pow(p_sup, 4);

  HypothesisReport rep;
  rep.tag = TheoremTag::kSchrodinger;
  rep.set("a_grad", audit.a_grad);
  rep.set("b_grad", audit.b_grad);
  rep.set("a_r", audit.a_r);
  rep.set("b_r", audit.b_r);
  rep.set("p_sup", p_sup);
  rep.set("half_width", L);

  // Best C_alpha per alpha: eps eps.b_grad <= alpha, delta the largest grid
  // value with delta <= alpha eps.
  const auto& g = knobs.grid;
  struct CBest {
    double c = kInf, eps = 0.0, delta = 0.0;
  };
  std::vector<CBest> c_best(g.size());
  for (std::size_t ia = 0; ia < g.size(); ++ia) {
    const double alpha = g[ia];
    if (alpha >= 1.0) continue;
    for (double eps : g) {
      if (eps * audit.b_grad > alpha) continue;
      double delta = 0.0;
      for (double dd : g)
        if (dd / eps <= alpha) delta = std::max(delta, dd);
      if (delta == 0.0) continue;
      const double c = eps * audit.a_grad + 1.0 / (4.0 * eps * delta);
      if (c < c_best[ia].c) c_best[ia] = {c, eps, delta};
    }
  }

  struct Choice {
    double lambda0 = kInf, gamma = kInf;
    double nu = 0, beta = 0, alpha = 0, eps = 0, delta = 0, a = 0, b = 0, c = 0;
  } best, best_any;
  for (double nu : g)
    for (double beta : g) {
      const double b = std::max(beta * (1.0 + 1.0 / (4.0 * nu)), audit.b_r * (1.0 + nu));
      if (!(b < 1.0)) continue;
      const double a = p4 / (4.0 * beta) * (1.0 + 1.0 / (4.0 * nu)) + audit.a_r * (1.0 + nu);
      for (std::size_t ia = 0; ia < g.size(); ++ia) {
        const double alpha = g[ia];
        if (!std::isfinite(c_best[ia].c) || !(b / (1.0 - alpha) < 1.0)) continue;
        for (double lam : knobs.lambda0_magnitudes) {
          const double gamma = schrodinger_gamma(a, b, c_best[ia].c, alpha, lam);
          const Choice ch{lam, gamma, nu, beta, alpha, c_best[ia].eps, c_best[ia].delta, a, b,
                          c_best[ia].c};
          if (gamma < best_any.gamma) best_any = ch;
          if (gamma < 1.0) {
            // smallest |lambda0| first, then smallest gamma; grid order breaks ties
            if (lam < best.lambda0 || (lam == best.lambda0 && gamma < best.gamma)) best = ch;
            break;
          }
        }
      }
    }

  const Choice& c = std::isfinite(best.lambda0) ? best : best_any;
  rep.set("nu", c.nu);
  rep.set("beta", c.beta);
  rep.set("alpha", c.alpha);
  rep.set("eps", c.eps);
  rep.set("delta", c.delta);
  rep.set("a", c.a);
  rep.set("b", c.b);
  rep.set("C_alpha", c.c);
  rep.set("gamma_lambda0_alpha", c.gamma);
  if (std::isfinite(best.lambda0)) {
    rep.lambda = -best.lambda0;
    rep.set("lambda0", -best.lambda0);
    rep.verdict = Evidence::kPass;
  } else {
    rep.lambda = std::isfinite(c.lambda0) ? -c.lambda0 : 0.0;
    rep.set("best_gamma", c.gamma);
    rep.verdict = Evidence::kFail;
    rep.notes.push_back("no knob combination on the grid gives gamma < 1");
  }
  rep.notes.push_back("constants fitted on [-L, L] with L the largest half width");
  return rep;
}

}  // namespace specexact
