#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specexact/matrix.hpp"

namespace specexact {

// Declared band structure. An empty optional means the side is unbounded.
struct BandMeta {
  std::optional<std::size_t> lower;  // A_ij == 0 when i - j > lower
  std::optional<std::size_t> upper;  // A_ij == 0 when j - i > upper

  bool inside(std::size_t i, std::size_t j) const noexcept {
    if (i > j && lower && i - j > *lower) return false;
    if (j > i && upper && j - i > *upper) return false;
    return true;
  }
};

// An infinite matrix given by its entry rule, 1-based: entry(i, j) = A_ij.
struct OperatorSpec {
  std::string name;
  std::function<cplx(std::size_t, std::size_t)> entry;
  BandMeta band;

  // Short-circuits to 0 outside the declared band.
  cplx operator()(std::size_t i, std::size_t j) const {
    return band.inside(i, j) ? entry(i, j) : cplx{};
  }
};

struct Provenance {
  std::string source;   // spec or problem name
  std::string scheme;   // "galerkin", "block_galerkin", "sl_fd", "schrodinger_fd", ...
  std::size_t size_param = 0;
  std::optional<std::vector<double>> grid;
};

struct SectionMatrix {
  ComplexMatrix matrix;
  Provenance provenance;
};

// Zero diagonal, off-diagonal q_k = k + 1 (k odd), k / 2 (k even).
OperatorSpec jacobi_spec();
// A_ij = j (i < j), j^3 (i == j), 0 below the diagonal.
OperatorSpec upper_triangular_spec();
OperatorSpec diagonal_spec(std::string name, std::function<cplx(std::size_t)> diag);
OperatorSpec identity_spec();
OperatorSpec zero_spec();

enum class TailRule { kZero, kConstant, kPeriodic, kLinear };

struct BandedDiagonal {
  long offset = 0;            // j - i
  std::vector<cplx> values;   // values[p - 1] at position p = min(i, j)
};

// Finite table of diagonals, continued past the table by the tail rule.
// Throws ArgumentError on empty or duplicate diagonals.
OperatorSpec custom_banded_spec(std::string name, std::vector<BandedDiagonal> diagonals,
                                TailRule tail);

// Leading k x k section. DataError names the first non-finite entry.
SectionMatrix truncate(const OperatorSpec& spec, std::size_t k);

// Splitting A = T + S with T block diagonal. Past the last cut point the
// blocks continue with the size of the last block.
class BlockSplit {
 public:
  BlockSplit(OperatorSpec spec, std::vector<std::size_t> cut_points,
             std::vector<ComplexMatrix> blocks);

  const std::vector<std::size_t>& cut_points() const noexcept { return cuts_; }
  const std::vector<ComplexMatrix>& diagonal_blocks() const noexcept { return blocks_; }
  const OperatorSpec& spec() const noexcept { return spec_; }

  // 0-based number of the block holding 1-based index i.
  std::size_t block_of(std::size_t i) const;
  // Cut point at or after k (sizes aligned with block boundaries).
  std::size_t aligned_size(std::size_t k) const;

  cplx block_entry(std::size_t i, std::size_t j) const;     // T_ij
  cplx coupling_entry(std::size_t i, std::size_t j) const;  // S_ij

  ComplexMatrix t_section(std::size_t k) const;
  ComplexMatrix s_section(std::size_t k) const;

 private:
  OperatorSpec spec_;
  std::vector<std::size_t> cuts_;
  std::vector<ComplexMatrix> blocks_;
  std::size_t last_width_ = 1;
};

// Throws ArgumentError unless cut_points is non-empty, positive and strictly
// increasing.
BlockSplit split_blocks(const OperatorSpec& spec, const std::vector<std::size_t>& cut_points);

// Cut points k_n = step * n for n = 1..count.
std::vector<std::size_t> uniform_cuts(std::size_t step, std::size_t count);

enum class CaseHint { kA, kB, kC, kNone };
const char* to_string(CaseHint h) noexcept;

struct BandProfile {
  std::size_t scan_limit = 0;
  std::vector<std::size_t> row_counts;   // #N_i, i = 1..scan_limit, within the scan
  std::vector<std::size_t> col_counts;   // #M_j
  // Row i <= L/2 with a nonzero in columns (L, 2L]; rows near the scan edge
  // are not judged since any band reaches across it.
  std::vector<bool> open_rows;
  std::vector<bool> open_cols;
  std::optional<std::size_t> max_row_count;  // N, empty if any row is open
  std::optional<std::size_t> max_col_count;  // M
  std::vector<double> row_envelope;      // C_i = max_j |B_ij|
  std::vector<double> col_envelope;      // D_j = max_i |B_ij|
  std::vector<double> row_partial_sums;  // sum_{i <= k} C_i^2 #N_i
  std::vector<double> col_partial_sums;  // sum_{j <= k} D_j^2 #M_j
  bool counts_stable = false;            // max counts equal on [1, L/2] and [1, L]
  bool envelope_stable = false;          // max envelope equal on [1, L/2] and [1, L]
  double row_tail_ratio = 0.0;
  double col_tail_ratio = 0.0;
  CaseHint hint = CaseHint::kNone;
};

// Counts and envelopes of A (or of B_ij = A_ij / (A_jj - lambda), i != j,
// when normalize_by_diag). PoleError names j when |A_jj - lambda| <= 1e-12.
BandProfile band_profile(const OperatorSpec& spec, std::size_t scan_limit, cplx lambda,
                         bool normalize_by_diag);

}  // namespace specexact
