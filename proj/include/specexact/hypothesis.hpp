#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specexact/discretize.hpp"
#include "specexact/matrix.hpp"
#include "specexact/operator_model.hpp"
#include "specexact/resolvent.hpp"

namespace specexact {

enum class TheoremTag {
  kPerturbGSR,
  kPerturbDiscComp,
  kTwoByTwo,
  kDiagonalDecay,
  kBandedCase,
  kSLMatrix,
  kSchrodinger,
  kGalerkin,
};
const char* to_string(TheoremTag t) noexcept;

enum class Evidence { kPass, kFail, kInconclusive };
const char* to_string(Evidence e) noexcept;  // PassEvidence, ...

struct HypothesisReport {
  TheoremTag tag = TheoremTag::kPerturbGSR;
  cplx lambda;
  std::vector<std::pair<std::string, double>> constants;  // in insertion order
  std::vector<std::size_t> sizes;
  std::map<std::string, std::vector<double>> evidence;    // per-size arrays
  Evidence verdict = Evidence::kInconclusive;
  std::vector<std::string> notes;

  void set(const std::string& name, double value);
  // ArgumentError when absent.
  double constant(const std::string& name) const;
  bool has(const std::string& name) const;
};

constexpr double kDefaultMargin = 1e-3;

// gamma_n = |S_n (T_n - lambda)^{-1}| per size; PassEvidence iff the sup is at
// most 1 - margin. Also records per size the Neumann consequence
// sigma_min(T_n + S_n - lambda) >= (1 - gamma_n) sigma_min(T_n - lambda).
// PoleError(size) when sigma_min(T_n - lambda) <= 1e-12 |T_n|.
HypothesisReport relative_bound(const SectionBuilder& t_sections, const SectionBuilder& s_sections,
                                cplx lambda, const std::vector<std::size_t>& sizes,
                                TheoremTag tag = TheoremTag::kPerturbGSR,
                                double margin = kDefaultMargin);

// |X (Y - lambda)^{-1}| for one pair of sections; PoleError(index) at a pole.
double relative_norm(const ComplexMatrix& x, const ComplexMatrix& y, cplx lambda,
                     std::size_t index = 0);

struct BlockSections {
  ComplexMatrix a, b, c, d;  // [A B; C D]
};
using BlockBuilder = std::function<BlockSections(std::size_t)>;

// gamma^AC = sup |C_n (A_n - lambda)^{-1}|, gamma^DB = sup |B_n (D_n - lambda)^{-1}|;
// PassEvidence iff the product is at most 1 - margin.
HypothesisReport gamma_product_2x2(const BlockBuilder& blocks, cplx lambda,
                                   const std::vector<std::size_t>& sizes,
                                   double margin = kDefaultMargin);

// Quadrants of sl_block_assemble.
BlockSections sl_matrix_blocks(const SLMatrixProblem& prob, std::size_t n, std::size_t m);

// block(j, n) for j in js, n in ns; d_j = max_n resolvent_norm(block(j, n), lambda).
// PassEvidence iff the head-third maximum exceeds the tail-third maximum by a
// factor >= 2 and the tail minimum is below 0.1 times the head maximum.
using BlockFamily = std::function<ComplexMatrix(std::size_t j, std::size_t n)>;
HypothesisReport uniform_resolvent_decay(const BlockFamily& block, cplx lambda,
                                         const std::vector<std::size_t>& js,
                                         const std::vector<std::size_t>& ns,
                                         TheoremTag tag = TheoremTag::kDiagonalDecay);

// Counts, envelopes and case hint of the (normalized) band profile.
HypothesisReport banded_case(const OperatorSpec& spec, std::size_t scan_limit, cplx lambda);

// q_min for beta in [pi/2, pi), q_min - 2 tan(beta)^2 / p_min below.
double sl_coercivity(double p_min, double q_min, double beta);

struct Lambda0Search {
  cplx lambda0;
  double eps = 0.0;
  bool found = false;
  HypothesisReport report;
};

// lambda0 on the bisector of the wider angle between gamma1 R and gamma2 R,
// at radius sqrt(2) / (eps sin theta), for eps = 0.5, 0.2, 0.1, 0.05, ...
// AssumptionError unless s_sup u_sup < |gamma1| |gamma2|.
Lambda0Search sl_lambda0_search(cplx gamma1, cplx gamma2, double s_sup, double t_sup,
                                double u_sup, double v_sup);

struct SchrodingerKnobs {
  std::vector<double> grid;  // shared by nu, beta, alpha, eps, delta
  std::vector<double> lambda0_magnitudes;
  static SchrodingerKnobs standard();  // 10^(-4 + i/8), i = 0..32; 10^k, k = 0..8
};

// Constants of the Schroedinger perturbation argument at the largest half
// width. AssumptionError when b_r >= 1.
HypothesisReport schrodinger_constants(const SchrodingerProblem& prob,
                                       const SchrodingerKnobs& knobs = SchrodingerKnobs::standard(),
                                       std::size_t audit_points = 10000);

// gamma_{lambda0, alpha} from its ingredients.
double schrodinger_gamma(double a, double b, double c_alpha, double alpha, double lambda0_abs);

}  // namespace specexact
