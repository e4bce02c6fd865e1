#include "specexact/operator_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "specexact/errors.hpp"

namespace specexact {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string index_pair(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

OperatorSpec jacobi_spec() {
  OperatorSpec s;
  s.name = "jacobi";
  s.band = {1, 1};
  s.entry = [](std::size_t i, std::size_t j) -> cplx {
    if (i == j) return 0.0;
    const std::size_t k = std::min(i, j);
    return k % 2 == 1 ? static_cast<double>(k + 1) : 0.5 * static_cast<double>(k);
  };
  return s;
}

OperatorSpec upper_triangular_spec() {
  OperatorSpec s;
  s.name = "upper_triangular";
  s.band = {0, std::nullopt};
  s.entry = [](std::size_t i, std::size_t j) -> cplx {
    const double jd = static_cast<double>(j);
    if (i == j) return jd * jd * jd;
    return i < j ? jd : 0.0;
  };
  return s;
}

OperatorSpec diagonal_spec(std::string name, std::function<cplx(std::size_t)> diag) {
  OperatorSpec s;
  s.name = std::move(name);
  s.band = {0, 0};
  s.entry = [d = std::move(diag)](std::size_t i, std::size_t) { return d(i); };
  return s;
}

OperatorSpec identity_spec() {
  return diagonal_spec("identity", [](std::size_t) { return cplx(1.0); });
}

OperatorSpec zero_spec() {
  OperatorSpec s;
  s.name = "zero";
  s.band = {0, 0};
  s.entry = [](std::size_t, std::size_t) { return cplx{}; };
  return s;
}

OperatorSpec custom_banded_spec(std::string name, std::vector<BandedDiagonal> diagonals,
                                TailRule tail) {
  if (diagonals.empty()) throw ArgumentError("custom_banded: no diagonals given");
  std::set<long> seen;
  long lo = 0, hi = 0;
  for (const auto& d : diagonals) {
    if (d.values.empty())
      throw ArgumentError("custom_banded: diagonal " + std::to_string(d.offset) + " is empty");
    if (!seen.insert(d.offset).second)
      throw ArgumentError("custom_banded: duplicate diagonal " + std::to_string(d.offset));
    for (const auto& v : d.values)
      if (!finite(v))
        throw ArgumentError("custom_banded: non-finite value on diagonal " +
                            std::to_string(d.offset));
    lo = std::min(lo, d.offset);
    hi = std::max(hi, d.offset);
  }
  OperatorSpec s;
  s.name = std::move(name);
  s.band = {static_cast<std::size_t>(-lo), static_cast<std::size_t>(hi)};
  s.entry = [diags = std::move(diagonals), tail](std::size_t i, std::size_t j) -> cplx {
    const long off = static_cast<long>(j) - static_cast<long>(i);
    for (const auto& d : diags) {
      if (d.offset != off) continue;
      const std::size_t p = std::min(i, j);
      const auto& v = d.values;
      const std::size_t len = v.size();
      if (p <= len) return v[p - 1];
      switch (tail) {
        case TailRule::kZero:
          return 0.0;
        case TailRule::kConstant:
          return v.back();
        case TailRule::kPeriodic:
          return v[(p - 1) % len];
        case TailRule::kLinear:
          if (len == 1) return v.back();
          return v[len - 1] + static_cast<double>(p - len) * (v[len - 1] - v[len - 2]);
      }
    }
    return 0.0;
  };
  return s;
}

SectionMatrix truncate(const OperatorSpec& spec, std::size_t k) {
  if (k == 0) throw ArgumentError("truncate: size must be at least 1");
  SectionMatrix out;
  out.matrix = ComplexMatrix(k, k);
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t j0 = spec.band.lower && i > *spec.band.lower + 1 ? i - *spec.band.lower : 1;
    const std::size_t j1 = spec.band.upper ? std::min(k, i + *spec.band.upper) : k;
    for (std::size_t j = j0; j <= j1; ++j) {
      const cplx v = spec.entry(i, j);
      if (!finite(v))
        throw DataError(spec.name + ": non-finite entry at " + index_pair(i, j), i, j);
      out.matrix(i - 1, j - 1) = v;
    }
  }
  out.provenance = {spec.name, "galerkin", k, std::nullopt};
  return out;
}

BlockSplit::BlockSplit(OperatorSpec spec, std::vector<std::size_t> cut_points,
                       std::vector<ComplexMatrix> blocks)
    : spec_(std::move(spec)), cuts_(std::move(cut_points)), blocks_(std::move(blocks)) {
  last_width_ = cuts_.size() == 1 ? cuts_[0] : cuts_.back() - cuts_[cuts_.size() - 2];
}

std::size_t BlockSplit::block_of(std::size_t i) const {
  if (i == 0) throw ArgumentError("block_of: indices are 1-based");
  auto it = std::lower_bound(cuts_.begin(), cuts_.end(), i);
  if (it != cuts_.end()) return static_cast<std::size_t>(it - cuts_.begin());
  return cuts_.size() + (i - cuts_.back() - 1) / last_width_;
}

std::size_t BlockSplit::aligned_size(std::size_t k) const {
  auto it = std::lower_bound(cuts_.begin(), cuts_.end(), k);
  if (it != cuts_.end()) return *it;
  const std::size_t extra = (k - cuts_.back() + last_width_ - 1) / last_width_;
  return cuts_.back() + extra * last_width_;
}

cplx BlockSplit::block_entry(std::size_t i, std::size_t j) const {
  return block_of(i) == block_of(j) ? spec_(i, j) : cplx{};
}

cplx BlockSplit::coupling_entry(std::size_t i, std::size_t j) const {
  return block_of(i) == block_of(j) ? cplx{} : spec_(i, j);
}

ComplexMatrix BlockSplit::t_section(std::size_t k) const {
  ComplexMatrix a = truncate(spec_, k).matrix;
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = 1; j <= k; ++j)
      if (a(i - 1, j - 1) != cplx{} && block_of(i) != block_of(j)) a(i - 1, j - 1) = 0.0;
  return a;
}

ComplexMatrix BlockSplit::s_section(std::size_t k) const {
  ComplexMatrix a = truncate(spec_, k).matrix;
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = 1; j <= k; ++j)
      if (a(i - 1, j - 1) != cplx{} && block_of(i) == block_of(j)) a(i - 1, j - 1) = 0.0;
  return a;
}

BlockSplit split_blocks(const OperatorSpec& spec, const std::vector<std::size_t>& cut_points) {
  if (cut_points.empty()) throw ArgumentError("split_blocks: no cut points");
  std::size_t prev = 0;
  for (auto c : cut_points) {
    if (c <= prev)
      throw ArgumentError("split_blocks: cut points must be strictly increasing and positive");
    prev = c;
  }
  const auto section = truncate(spec, cut_points.back()).matrix;
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(cut_points.size());
  prev = 0;
  for (auto c : cut_points) {
    blocks.push_back(section.block(prev, prev, c - prev, c - prev));
    prev = c;
  }
  return BlockSplit(spec, cut_points, std::move(blocks));
}

std::vector<std::size_t> uniform_cuts(std::size_t step, std::size_t count) {
  if (step == 0) throw ArgumentError("uniform_cuts: step must be positive");
  std::vector<std::size_t> c(count);
  for (std::size_t n = 0; n < count; ++n) c[n] = step * (n + 1);
  return c;
}

const char* to_string(CaseHint h) noexcept {
  switch (h) {
    case CaseHint::kA: return "a";
    case CaseHint::kB: return "b";
    case CaseHint::kC: return "c";
    case CaseHint::kNone: return "none";
  }
  return "none";
}

namespace {

// Ratio of the last block of terms to the block before it: decades when the
// scan is long enough, dyadic halves otherwise. Zero over zero counts as 0.
double tail_ratio(const std::vector<double>& partial) {
  const std::size_t L = partial.size();
  std::size_t a, b;
  if (L >= 100) {
    a = L / 100;
    b = L / 10;
  } else {
    a = L / 4;
    b = L / 2;
  }
  auto sum_upto = [&](std::size_t k) { return k == 0 ? 0.0 : partial[k - 1]; };
  const double tail = sum_upto(L) - sum_upto(b);
  const double prev = sum_upto(b) - sum_upto(a);
  if (tail == 0.0) return 0.0;
  if (prev == 0.0) return INFINITY;
  return tail / prev;
}

}  // namespace

BandProfile band_profile(const OperatorSpec& spec, std::size_t scan_limit, cplx lambda,
                         bool normalize_by_diag) {
  if (scan_limit < 2) throw ArgumentError("band_profile: scan limit must be at least 2");
  const std::size_t L = scan_limit;
  const std::size_t probe = 2 * L;

  std::vector<cplx> denom;
  if (normalize_by_diag) {
    denom.resize(probe + 1);
    for (std::size_t j = 1; j <= probe; ++j) {
      denom[j] = spec(j, j) - lambda;
      if (std::abs(denom[j]) <= 1e-12)
        throw PoleError("band_profile: lambda hits the diagonal entry at j = " +
                            std::to_string(j),
                        j);
    }
  }
  auto b_entry = [&](std::size_t i, std::size_t j) -> cplx {
    if (!spec.band.inside(i, j)) return cplx{};
    if (normalize_by_diag) {
      if (i == j) return cplx{};
      return spec.entry(i, j) / denom[j];
    }
    return spec.entry(i, j);
  };
  auto col_range = [&](std::size_t i, std::size_t limit) {
    const std::size_t j0 = spec.band.lower && i > *spec.band.lower + 1 ? i - *spec.band.lower : 1;
    const std::size_t j1 = spec.band.upper ? std::min(limit, i + *spec.band.upper) : limit;
    return std::pair{j0, j1};
  };

  BandProfile p;
  p.scan_limit = L;
  p.row_counts.assign(L, 0);
  p.col_counts.assign(L, 0);
  p.open_rows.assign(L, false);
  p.open_cols.assign(L, false);
  p.row_envelope.assign(L, 0.0);
  p.col_envelope.assign(L, 0.0);

  for (std::size_t i = 1; i <= probe; ++i) {
    auto [j0, j1] = col_range(i, probe);
    for (std::size_t j = j0; j <= j1; ++j) {
      if (i > L && j > L) continue;
      const cplx v = b_entry(i, j);
      if (!finite(v))
        throw DataError(spec.name + ": non-finite entry at " + index_pair(i, j), i, j);
      if (v == cplx{}) continue;
      if (i <= L && j <= L) {
        const double a = std::abs(v);
        ++p.row_counts[i - 1];
        ++p.col_counts[j - 1];
        p.row_envelope[i - 1] = std::max(p.row_envelope[i - 1], a);
        p.col_envelope[j - 1] = std::max(p.col_envelope[j - 1], a);
      } else if (i <= L / 2) {
        p.open_rows[i - 1] = true;
      } else if (j <= L / 2) {
        p.open_cols[j - 1] = true;
      }
    }
  }

  const bool any_open_row = std::find(p.open_rows.begin(), p.open_rows.end(), true) != p.open_rows.end();
  const bool any_open_col = std::find(p.open_cols.begin(), p.open_cols.end(), true) != p.open_cols.end();
  const auto max_n = *std::max_element(p.row_counts.begin(), p.row_counts.end());
  const auto max_m = *std::max_element(p.col_counts.begin(), p.col_counts.end());
  if (!any_open_row) p.max_row_count = max_n;
  if (!any_open_col) p.max_col_count = max_m;

  p.row_partial_sums.resize(L);
  p.col_partial_sums.resize(L);
  double rs = 0.0, cs = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    rs += p.row_envelope[k] * p.row_envelope[k] * static_cast<double>(p.row_counts[k]);
    cs += p.col_envelope[k] * p.col_envelope[k] * static_cast<double>(p.col_counts[k]);
    p.row_partial_sums[k] = rs;
    p.col_partial_sums[k] = cs;
  }

  const std::size_t half = L / 2;
  auto max_upto = [](const auto& v, std::size_t k) {
    return *std::max_element(v.begin(), v.begin() + static_cast<long>(k));
  };
  p.counts_stable = max_upto(p.row_counts, half) == max_n && max_upto(p.col_counts, half) == max_m;
  const double env = std::max(max_upto(p.row_envelope, L), max_upto(p.col_envelope, L));
  const double env_half = std::max(max_upto(p.row_envelope, half), max_upto(p.col_envelope, half));
  p.envelope_stable = env == env_half;

  p.row_tail_ratio = tail_ratio(p.row_partial_sums);
  p.col_tail_ratio = tail_ratio(p.col_partial_sums);
  constexpr double kRatio = 0.99;
  if (!any_open_row && !any_open_col && p.counts_stable)
    p.hint = CaseHint::kA;
  else if (!any_open_row && p.row_tail_ratio < kRatio)
    p.hint = CaseHint::kB;
  else if (!any_open_col && p.col_tail_ratio < kRatio)
    p.hint = CaseHint::kC;
  return p;
}

}  // namespace specexact
