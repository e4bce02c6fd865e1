#include "specexact/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specexact/errors.hpp"
#include "specexact/parallel.hpp"

namespace specexact {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxQuadrature = 1024;

bool lex_less(cplx a, cplx b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

// Min-cost perfect assignment on a square cost matrix (potentials, O(n^3)).
// Returns col_of_row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

// pair[i] = matched index in b or npos. Connected pieces of the "within
// radius" graph are assigned separately; each piece gets dummy rows and
// columns so that leaving a point unmatched costs radius / 2.
std::vector<std::size_t> assign(const std::vector<cplx>& a, const std::vector<cplx>& b,
                                double radius) {
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  const std::size_t na = a.size(), nb = b.size();
  std::vector<std::size_t> pair(na, npos);
  if (na == 0 || nb == 0) return pair;

  double max_cost = 0.0;
  for (cplx x : a)
    for (cplx y : b) max_cost = std::max(max_cost, std::abs(x - y));
  const double dummy = std::isfinite(radius) ? 0.5 * radius : max_cost + 1.0;
  const double forbidden = 4.0 * (max_cost + 2.0 * dummy + 1.0) * static_cast<double>(na + nb);

  std::vector<std::size_t> parent(na + nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (std::abs(a[i] - b[j]) <= radius) parent[find(na + j)] = find(i);

  std::vector<std::vector<std::size_t>> piece_a(na + nb), piece_b(na + nb);
  for (std::size_t i = 0; i < na; ++i) piece_a[find(i)].push_back(i);
  for (std::size_t j = 0; j < nb; ++j) piece_b[find(na + j)].push_back(j);

  for (std::size_t r = 0; r < na + nb; ++r) {
    const auto& pa = piece_a[r];
    const auto& pb = piece_b[r];
    if (pa.empty() || pb.empty()) continue;
    if (pa.size() == 1 && pb.size() == 1) {
      pair[pa[0]] = pb[0];
      continue;
    }
    // rows: pa then dummies for pb; cols: pb then dummies for pa
    const std::size_t ka = pa.size(), kb = pb.size(), n = ka + kb;
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < ka; ++i) {
      for (std::size_t j = 0; j < kb; ++j) c[i][j] = std::abs(a[pa[i]] - b[pb[j]]);
      for (std::size_t k = 0; k < ka; ++k) c[i][kb + k] = k == i ? dummy : forbidden;
    }
    for (std::size_t jd = 0; jd < kb; ++jd)
      for (std::size_t j = 0; j < kb; ++j) c[ka + jd][j] = j == jd ? dummy : forbidden;
    auto col = hungarian(c);
    // Equal total cost is common on the real line (nested pairs). Break such
    // ties toward the smaller sum of squares so the result does not depend
    // on which spectrum comes first.
    const double slack = 1e-12 * (max_cost + 1.0);
    for (bool swapped = true; swapped;) {
      swapped = false;
      for (std::size_t i = 0; i < ka; ++i)
        for (std::size_t k = i + 1; k < ka; ++k) {
          const std::size_t j = col[i], l = col[k];
          if (j >= kb || l >= kb) continue;
          const double now = c[i][j] + c[k][l], alt = c[i][l] + c[k][j];
          if (std::abs(now - alt) > slack) continue;
          if (c[i][l] * c[i][l] + c[k][j] * c[k][j] + slack <
              c[i][j] * c[i][j] + c[k][l] * c[k][l]) {
            std::swap(col[i], col[k]);
            swapped = true;
          }
        }
    }
    for (std::size_t i = 0; i < ka; ++i)
      if (col[i] < kb && c[i][col[i]] <= radius) pair[pa[i]] = pb[col[i]];
  }
  return pair;
}

std::optional<double> median_spacing(const std::vector<cplx>& s) {
  double scale = 1.0;
  for (cplx z : s) scale = std::max(scale, std::abs(z));
  std::vector<double> nn;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double d = kInf;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double e = std::abs(s[i] - s[j]);
      if (j != i && e > 1e-10 * scale) d = std::min(d, e);
    }
    if (std::isfinite(d)) nn.push_back(d);
  }
  if (nn.empty()) return std::nullopt;
  std::sort(nn.begin(), nn.end());
  const std::size_t k = nn.size();
  return k % 2 ? nn[k / 2] : 0.5 * (nn[k / 2 - 1] + nn[k / 2]);
}

}  // namespace

std::vector<SpectrumResult> ladder_spectra(const Ladder& ladder, const Window& window) {
  std::vector<SpectrumResult> out(ladder.sizes.size());
  parallel_for(ladder.sizes.size(), [&](std::size_t k) {
    const ComplexMatrix m = ladder.sections(ladder.sizes[k]);
    const auto e = eig_dense(m);
    SpectrumResult& r = out[k];
    r.size = ladder.sizes[k];
    r.norm = e.norm;
    r.dimension = m.rows();
    r.residual_kind = e.residual_kind;
    for (std::size_t i = 0; i < e.eigenvalues.size(); ++i)
      if (window.contains(e.eigenvalues[i])) {
        r.eigenvalues.push_back(e.eigenvalues[i]);
        r.residuals.push_back(e.residuals[i]);
      }
  });
  return out;
}

double Trajectory::cauchy_tail() const {
  const std::size_t steps = values.size() > 0 ? values.size() - 1 : 0;
  if (steps == 0) return kInf;
  const std::size_t tail = std::max<std::size_t>(1, (steps + 2) / 3);
  double worst = 0.0;
  for (std::size_t k = values.size() - tail; k < values.size(); ++k)
    worst = std::max(worst, std::abs(values[k] - values[k - 1]));
  return worst;
}

double default_match_radius(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  if (auto s = median_spacing(small)) return 0.5 * *s;
  if (auto s = median_spacing(large)) return 0.5 * *s;
  return kInf;
}

std::vector<Trajectory> match_trajectories(const std::vector<SpectrumResult>& spectra,
                                           std::optional<double> match_radius) {
  if (spectra.size() < 2) throw ArgumentError("match_trajectories: need at least two sizes");
  std::vector<Trajectory> out;
  std::vector<std::size_t> owner;  // trajectory of each eigenvalue of the current size
  for (cplx z : spectra[0].eigenvalues) {
    owner.push_back(out.size());
    out.push_back(Trajectory{{spectra[0].size}, {z}});
  }
  for (std::size_t k = 1; k < spectra.size(); ++k) {
    const auto& a = spectra[k - 1].eigenvalues;
    const auto& b = spectra[k].eigenvalues;
    const double radius = match_radius ? *match_radius : default_match_radius(a, b);
    const auto pair = assign(a, b, radius);
    std::vector<std::size_t> next(b.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < a.size(); ++i)
      if (pair[i] < b.size()) next[pair[i]] = owner[i];
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (next[j] == std::numeric_limits<std::size_t>::max()) {
        next[j] = out.size();
        out.push_back(Trajectory{});
      }
      out[next[j]].sizes.push_back(spectra[k].size);
      out[next[j]].values.push_back(b[j]);
    }
    owner = std::move(next);
  }
  return out;
}

double clustering_radius(double norm, double tol) noexcept {
  return std::max(1e-6 * norm, 10.0 * tol);
}

std::vector<LimitCandidate> detect_limits(const std::vector<Trajectory>& trajectories,
                                          std::size_t ladder_length, std::size_t final_size,
                                          double tol, double radius) {
  if (!(tol > 0.0)) throw ArgumentError("detect_limits: tol must be positive");
  std::vector<std::pair<cplx, std::size_t>> hits;
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    const auto& tr = trajectories[t];
    if (tr.values.empty() || tr.sizes.back() != final_size) continue;
    if (2 * tr.values.size() < ladder_length) continue;
    if (!(tr.cauchy_tail() < tol)) continue;
    hits.emplace_back(tr.values.back(), t);
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto& x, const auto& y) { return lex_less(x.first, y.first); });
  std::vector<cplx> values;
  for (const auto& h : hits) values.push_back(h.first);
  std::vector<LimitCandidate> out;
  for (const auto& c : cluster_eigenvalues(values, radius)) {
    LimitCandidate lc;
    lc.value = c.center;
    lc.multiplicity = c.size();
    for (auto k : c.members) lc.trajectories.push_back(hits[k].second);
    out.push_back(std::move(lc));
  }
  return out;
}

MultiplicityReport multiplicity_check(cplx lambda, const Ladder& ladder, double radius,
                                      std::size_t quadrature) {
  MultiplicityReport rep;
  rep.sizes = ladder.sizes;
  rep.radius = radius;
  rep.ranks.assign(ladder.sizes.size(), std::nullopt);
  std::vector<std::string> notes(ladder.sizes.size());
  parallel_for(ladder.sizes.size(), [&](std::size_t k) {
    const ComplexMatrix m = ladder.sections(ladder.sizes[k]);
    for (std::size_t q = quadrature;;) {
      try {
        rep.ranks[k] = contour_rank(m, lambda, radius, q).rank;
        return;
      } catch (const ResolutionError& e) {
        if (e.suggested_points() > kMaxQuadrature) {
          notes[k] = "n=" + std::to_string(ladder.sizes[k]) + ": projection unresolved at Q=" +
                     std::to_string(q);
          return;
        }
        q = e.suggested_points();
      } catch (const ContourError&) {
        notes[k] = "n=" + std::to_string(ladder.sizes[k]) + ": contour-blocked";
        return;
      }
    }
  });
  for (auto& n : notes)
    if (!n.empty()) rep.notes.push_back(std::move(n));

  const std::size_t len = rep.ranks.size();
  if (len >= 3 && rep.ranks[len - 1] && rep.ranks[len - 1] == rep.ranks[len - 2] &&
      rep.ranks[len - 2] == rep.ranks[len - 3]) {
    rep.multiplicity = *rep.ranks[len - 1];
    std::size_t first = len - 1;
    while (first > 0 && rep.ranks[first - 1] == rep.ranks[len - 1]) --first;
    rep.stable_from = rep.sizes[first];
  } else {
    rep.notes.push_back("contour ranks did not stabilize over the last three sizes");
  }
  return rep;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kTrueEigenvalue: return "TrueEigenvalue";
    case Verdict::kSpurious: return "Spurious";
    case Verdict::kUndecided: return "Undecided";
  }
  return "?";
}

std::optional<double> auto_contour_radius(cplx lambda, const std::vector<cplx>& others,
                                          double radius) {
  double half_gap = kInf;
  for (cplx z : others) {
    const double d = std::abs(z - lambda);
    if (d > 0.0) half_gap = std::min(half_gap, 0.5 * d);
  }
  if (half_gap < 2.0 * radius) return std::nullopt;
  double r = std::min(1.0, half_gap);
  if (r < 100.0 * radius) r = std::min(100.0 * radius, half_gap);
  return r;
}

ClassifiedPoint classify_point(cplx lambda, const Ladder& certified,
                               const std::vector<SpectrumResult>* uncertified,
                               const ClassifyOptions& opts) {
  ClassifiedPoint out;
  out.value = lambda;
  out.source = certified.name;
  out.probe = region_probe(certified.sections, lambda, certified.sizes);

  std::optional<double> r = opts.contour_radius;
  if (!r && !opts.contour_blocked) r = auto_contour_radius(lambda, {}, opts.radius);
  if (r && !opts.contour_blocked) {
    out.ranks = multiplicity_check(lambda, certified, *r, opts.quadrature);
  } else {
    out.ranks.sizes = certified.sizes;
    out.ranks.ranks.assign(certified.sizes.size(), std::nullopt);
    out.notes.push_back("contour-blocked: other candidates too close");
  }

  if (uncertified) {
    out.uncertified_sizes = uncertified->size();
    for (const auto& s : *uncertified)
      if (std::any_of(s.eigenvalues.begin(), s.eigenvalues.end(),
                      [&](cplx z) { return std::abs(z - lambda) <= opts.radius; }))
        ++out.uncertified_hits;
  }

  const bool unbounded = out.probe.verdict == ProbeVerdict::kUnboundedEvidence;
  const bool bounded = out.probe.verdict == ProbeVerdict::kBoundedEvidence;
  if (unbounded && out.ranks.multiplicity && *out.ranks.multiplicity >= 1) {
    out.verdict = Verdict::kTrueEigenvalue;
    out.multiplicity = *out.ranks.multiplicity;
  } else if (bounded && uncertified && out.uncertified_sizes > 0 &&
             2 * out.uncertified_hits >= out.uncertified_sizes) {
    out.verdict = Verdict::kSpurious;
  } else {
    out.verdict = Verdict::kUndecided;
    if (bounded) out.notes.push_back("in resolvent set: no trajectory converges to the point");
  }
  return out;
}

TrackingReport track_and_classify(const Ladder& certified, const Ladder* uncertified,
                                  const Window& window, double tol, std::size_t quadrature) {
  TrackingReport rep;
  rep.tol = tol;
  rep.certified_spectra = ladder_spectra(certified, window);
  double norm = rep.certified_spectra.back().norm;
  if (uncertified) {
    rep.uncertified_spectra = ladder_spectra(*uncertified, window);
    norm = std::max(norm, rep.uncertified_spectra.back().norm);
  }
  rep.radius = clustering_radius(norm, tol);

  rep.certified_trajectories = match_trajectories(rep.certified_spectra);
  auto found = detect_limits(rep.certified_trajectories, certified.sizes.size(),
                             certified.sizes.back(), tol, rep.radius);
  for (auto& c : found) c.source = certified.name;
  if (uncertified) {
    rep.uncertified_trajectories = match_trajectories(rep.uncertified_spectra);
    auto more = detect_limits(rep.uncertified_trajectories, uncertified->sizes.size(),
                              uncertified->sizes.back(), tol, rep.radius);
    // a limit seen on both ladders is kept once, with the certified data
    for (auto& c : more) {
      c.source = uncertified->name;
      auto same = std::find_if(found.begin(), found.end(), [&](const LimitCandidate& f) {
        return std::abs(f.value - c.value) <= rep.radius;
      });
      if (same == found.end())
        found.push_back(std::move(c));
      else if (same->source == certified.name)
        same->source += "," + uncertified->name;
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
    return lex_less(x.value, y.value);
  });
  rep.candidates = found;

  std::vector<cplx> values;
  for (const auto& c : rep.candidates) values.push_back(c.value);
  // Contours must also keep clear of section eigenvalues outside the window
  // and of the ones that never settled into a limit.
  const std::vector<cplx> final_spectrum =
      rep.candidates.empty() ? std::vector<cplx>{} : eigenvalues(certified.sections(certified.sizes.back()));
  rep.points.resize(rep.candidates.size());
  parallel_for(rep.candidates.size(), [&](std::size_t k) {
    std::vector<cplx> others = values;
    others.erase(others.begin() + static_cast<long>(k));
    for (cplx z : final_spectrum)
      if (std::abs(z - values[k]) > rep.radius) others.push_back(z);
    ClassifyOptions opts;
    opts.tol = tol;
    opts.radius = rep.radius;
    opts.quadrature = quadrature;
    opts.contour_radius = auto_contour_radius(values[k], others, rep.radius);
    opts.contour_blocked = !opts.contour_radius;
    rep.points[k] = classify_point(values[k], certified,
                                   uncertified ? &rep.uncertified_spectra : nullptr, opts);
    rep.points[k].source = rep.candidates[k].source;
  });
  return rep;
}

}  // namespace specexact
