#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "specexact/cli.hpp"
#include "specexact/errors.hpp"
#include "specexact/hypothesis.hpp"
#include "specexact/tracker.hpp"

namespace specexact::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

// JSON has no infinities; they go out as strings like in the CSV files.
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}
Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}
Json cnum(cplx z) { return Json::array({num(z.real()), num(z.imag())}); }

std::string g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << bytes;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

cplx read_complex(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array()) return {j[0].get<double>(), j[1].get<double>()};
  return {j.value("re", 0.0), j.value("im", 0.0)};
}

std::vector<std::size_t> read_sizes(const Json& j) {
  std::vector<std::size_t> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<std::size_t>());
  } else {
    const std::size_t step = j.value("step", std::size_t{1});
    for (std::size_t k = j["from"].get<std::size_t>(); k <= j["to"].get<std::size_t>(); k += step)
      out.push_back(k);
  }
  return out;
}

Window read_window(const Json& st) {
  if (!st.contains("window")) return {};
  const auto& w = st["window"];
  return {w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()};
}

TheoremTag tag_from(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(TheoremTag::kGalerkin); ++k)
    if (s == to_string(static_cast<TheoremTag>(k))) return static_cast<TheoremTag>(k);
  throw ArgumentError("unknown theorem tag '" + s + "'");
}

Json to_json(const HypothesisReport& r) {
  Json j;
  j["tag"] = to_string(r.tag);
  j["lambda"] = cnum(r.lambda);
  Json c = Json::object();
  for (const auto& [k, v] : r.constants) c[k] = num(v);
  j["constants"] = c;
  j["sizes"] = r.sizes;
  Json e = Json::object();
  for (const auto& [k, v] : r.evidence) e[k] = nums(v);
  j["evidence"] = e;
  j["verdict"] = to_string(r.verdict);
  j["notes"] = r.notes;
  return j;
}

Json to_json(const RegionProbe& p) {
  Json j;
  j["z"] = cnum(p.z);
  j["sizes"] = p.sizes;
  j["sigma_min"] = nums(p.values);
  j["verdict"] = to_string(p.verdict);
  j["head_geomean"] = num(p.head_geomean);
  j["tail_geomean"] = num(p.tail_geomean);
  j["tail_min"] = num(p.tail_min);
  j["scale"] = num(p.scale);
  return j;
}

Json to_json(const MultiplicityReport& m) {
  Json j;
  j["sizes"] = m.sizes;
  Json ranks = Json::array();
  for (const auto& r : m.ranks) ranks.push_back(r ? Json(*r) : Json(nullptr));
  j["ranks"] = ranks;
  j["multiplicity"] = m.multiplicity ? Json(*m.multiplicity) : Json(nullptr);
  j["stable_from"] = m.stable_from ? Json(*m.stable_from) : Json(nullptr);
  j["radius"] = num(m.radius);
  j["notes"] = m.notes;
  return j;
}

Json to_json(const ClassifiedPoint& p) {
  Json j;
  j["value"] = cnum(p.value);
  j["verdict"] = to_string(p.verdict);
  j["multiplicity"] = p.multiplicity;
  j["source"] = p.source;
  j["uncertified_hits"] = p.uncertified_hits;
  j["uncertified_sizes"] = p.uncertified_sizes;
  j["probe"] = to_json(p.probe);
  j["contour"] = to_json(p.ranks);
  j["notes"] = p.notes;
  return j;
}

Json ladder_json(const Ladder& l) { return Json{{"name", l.name}, {"sizes", l.sizes}}; }

class Runner {
 public:
  Runner(const Problem& p, fs::path out, const Overrides& ov) : pr_(p), out_(std::move(out)), ov_(ov) {
    if (ov.sizes) {
      if (pr_.ladders.empty()) throw ArgumentError("--sizes: the problem has no ladder to replace");
      const auto& s = *ov.sizes;
      if (s.empty() || s.front() == 0) throw ArgumentError("--sizes: need positive sizes");
      for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] <= s[k - 1]) throw ArgumentError("--sizes: sizes must increase strictly");
      pr_.ladders.front().sizes = s;
    }
    builder_ = pr_.sections();
  }

  RunReport go() {
    fs::create_directories(out_);
    RunReport rep;
    rep.input_hash = fnv1a_hex(pr_.text);
    Json stages = Json::array();
    for (std::size_t k = 0; k < pr_.stages.size(); ++k) {
      const Stage& st = pr_.stages[k];
      StageOutcome o;
      o.kind = st.kind;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        dispatch(st, o);
      } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
        o.summary.push_back(st.kind + ": failed: " + e.what());
      }
      o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!o.ok) rep.exit_code = 1;
      Json sj;
      sj["index"] = k;
      sj["stage"] = st.kind;
      sj["pointer"] = st.pointer;
      sj["status"] = o.ok ? "ok" : "error";
      sj["error"] = o.ok ? Json(nullptr) : Json(o.error);
      sj["seconds"] = o.seconds;
      sj["files"] = stage_files_;
      stage_files_.clear();
      stages.push_back(sj);
      rep.stages.push_back(std::move(o));
    }
    // Stage files first, then the aggregated JSON files, then the report.
    for (const auto& [name, body] : csv_) write(name, body, rep);
    if (!classify_.empty()) write("classify.json", Json{{"problem", pr_.name}, {"entries", classify_}}.dump(2) + "\n", rep);
    if (!hypothesis_.empty())
      write("hypothesis.json", Json{{"problem", pr_.name}, {"reports", hypothesis_}}.dump(2) + "\n", rep);
    Json report;
    report["tool"] = "specexact";
    report["version"] = kVersion;
    report["problem"] = pr_.name;
    report["source"] = pr_.source_path;
    report["input_hash"] = rep.input_hash;
    report["stages"] = stages;
    report["files"] = rep.files;
    report["exit_code"] = rep.exit_code;
    write_atomic(out_ / "report.json", report.dump(2) + "\n");
    return rep;
  }

 private:
  void write(const std::string& name, const std::string& body, RunReport& rep) {
    write_atomic(out_ / name, body);
    rep.files.push_back(name);
  }

  // spectra.csv, spectra_2.csv, ... in stage order
  std::string claim(const std::string& stem) {
    const std::size_t k = ++counts_[stem];
    const std::string name = k == 1 ? stem + ".csv" : stem + "_" + std::to_string(k) + ".csv";
    stage_files_.push_back(name);
    return name;
  }

  const NamedLadder& named(const Json& st, const char* key) const {
    if (st.contains(key)) return pr_.ladder(st[key].get<std::string>());
    if (pr_.ladders.empty()) throw ArgumentError(std::string("no ladder for '") + key + "'");
    return pr_.ladders.front();
  }
  Ladder ladder(const NamedLadder& n) const { return Ladder{n.name, builder_, n.sizes}; }

  cplx lambda(const Json& st) {
    if (ov_.lambda) return *ov_.lambda;
    const Json& l = st["lambda"];
    if (!l.is_string()) return read_complex(l);
    if (pr_.sl_matrix) {
      const auto& m = *pr_.sl_matrix;
      auto s = sl_lambda0_search(m.gamma1, m.gamma2, m.s_sup, m.t_sup, m.u_sup, m.v_sup);
      if (!s.found) throw AssumptionError("lambda auto: no lambda0 with gamma product below 1");
      return s.lambda0;
    }
    if (pr_.schrodinger) {
      auto c = schrodinger_constants(*pr_.schrodinger);
      if (!c.has("lambda0")) throw AssumptionError("lambda auto: no lambda0 with gamma below 1");
      return c.constant("lambda0");
    }
    throw ArgumentError("lambda \"auto\" needs an sl_matrix or schrodinger problem");
  }

  // Uniform cuts are generated up to `count` blocks.
  std::vector<std::size_t> cuts(const Json& st, std::size_t count) const {
    const Json& c = st["cuts"];
    if (c.is_object()) return uniform_cuts(c["step"].get<std::size_t>(), count);
    return read_sizes(c);
  }

  void hypothesis(const Stage& st, StageOutcome& o, const HypothesisReport& r, const std::string& what) {
    Json j = to_json(r);
    j["stage"] = st.kind;
    j["pointer"] = st.pointer;
    hypothesis_.push_back(j);
    stage_files_.push_back("hypothesis.json");
    std::string line = what + ": " + to_string(r.tag) + " " + to_string(r.verdict) + " at λ=" + format_lambda(r.lambda);
    o.summary.push_back(line);
  }

  void dispatch(const Stage& st, StageOutcome& o) {
    const Json& p = st.params;
    const std::string& k = st.kind;
    if (k == "spectra") return spectra(p, o);
    if (k == "pseudo") return pseudo(p, o);
    if (k == "probe") return probe(st, o);
    if (k == "classify") return classify(st, o);
    if (k == "relative_bound") return relbound(st, o);
    if (k == "gamma_2x2") {
      const auto& lad = named(p, "ladder");
      const auto prob = *pr_.sl_matrix;
      const std::size_t m = pr_.grid;
      auto r = gamma_product_2x2([prob, m](std::size_t n) { return sl_matrix_blocks(prob, n, m); },
                                 lambda(p), lad.sizes, p.value("margin", kDefaultMargin));
      hypothesis(st, o, r, "gamma_2x2");
      o.summary.back() += " (gamma_AC*gamma_DB = " + g17(r.constant("product")) + ")";
      return;
    }
    if (k == "decay") {
      const auto js = read_sizes(p["blocks"]);
      const auto split = split_blocks(*pr_.spec, cuts(p, *std::max_element(js.begin(), js.end())));
      const auto& cp = split.cut_points();
      if (js.back() > cp.size()) throw ArgumentError("decay: block index beyond the cut points");
      auto block = [&split, &cp](std::size_t j, std::size_t) {
        const std::size_t lo = j == 1 ? 0 : cp[j - 2];
        return split.t_section(cp[j - 1]).block(lo, lo, cp[j - 1] - lo, cp[j - 1] - lo);
      };
      const TheoremTag tag = p.contains("tag") ? tag_from(p["tag"]) : TheoremTag::kDiagonalDecay;
      auto r = uniform_resolvent_decay(block, lambda(p), js, {1}, tag);
      hypothesis(st, o, r, "decay");
      return;
    }
    if (k == "band_profile") {
      auto r = banded_case(*pr_.spec, p["scan"].get<std::size_t>(), lambda(p));
      hypothesis(st, o, r, "band_profile");
      const auto& d = r.evidence.at("col_envelope");
      const std::string& note = r.notes.back();
      std::string line = "band case (" + note.substr(note.rfind(' ') + 1) + ") " + to_string(r.verdict) +
                         ", D_j for j = 1..5:";
      for (std::size_t j = 0; j < std::min<std::size_t>(5, d.size()); ++j) line += " " + g17(d[j]);
      o.summary.push_back(line + " ...");
      return;
    }
    if (k == "sl_lambda0") {
      const auto& m = *pr_.sl_matrix;
      auto s = sl_lambda0_search(m.gamma1, m.gamma2, m.s_sup, m.t_sup, m.u_sup, m.v_sup);
      hypothesis(st, o, s.report, "sl_lambda0");
      return;
    }
    if (k == "sl_coercivity") {
      HypothesisReport r;
      r.tag = TheoremTag::kSLMatrix;
      r.lambda = 0.0;
      auto one = [&](const SLProblem& s, const std::string& prefix) {
        const double c = sl_coercivity(s.p_min, s.q_min, s.beta);
        r.set(prefix + "lower_bound", c);
      };
      if (pr_.sl) {
        one(*pr_.sl, "");
      } else {
        one(pr_.sl_matrix->tau1, "tau1_");
        one(pr_.sl_matrix->tau2, "tau2_");
      }
      bool finite = true;
      for (const auto& [name, v] : r.constants) finite = finite && std::isfinite(v);
      r.verdict = finite ? Evidence::kPass : Evidence::kInconclusive;
      if (!finite) r.notes.push_back("q_min not declared");
      hypothesis(st, o, r, "sl_coercivity");
      return;
    }
    if (k == "schrodinger_constants") {
      auto r = schrodinger_constants(*pr_.schrodinger, SchrodingerKnobs::standard(),
                                     p.value("audit_points", std::size_t{10000}));
      hypothesis(st, o, r, "schrodinger_constants");
      if (r.has("lambda0"))
        o.summary.back() += " (gamma = " + g17(r.constant("gamma_lambda0_alpha")) + ")";
      return;
    }
    throw ArgumentError("unknown stage '" + k + "'");
  }

  void spectra(const Json& p, StageOutcome& o) {
    const auto lad = ladder(named(p, "ladder"));
    const auto res = ladder_spectra(lad, read_window(p));
    std::string csv = "n,re,im,residual\n";
    for (const auto& s : res)
      for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
        csv += std::to_string(s.size) + "," + g17(s.eigenvalues[i].real()) + "," +
               g17(s.eigenvalues[i].imag()) + "," + g17(s.residuals[i]) + "\n";
    csv_.emplace_back(claim("spectra"), std::move(csv));
    const auto& last = res.back();
    std::string line = "spectra on " + lad.name + ": n=" + std::to_string(last.size) + ",";
    for (std::size_t i = 0; i < std::min<std::size_t>(4, last.eigenvalues.size()); ++i)
      line += " " + format_lambda(last.eigenvalues[i]);
    if (last.eigenvalues.empty()) line += " no eigenvalues in the window";
    o.summary.push_back(line);
  }

  void pseudo(const Json& p, StageOutcome& o) {
    std::size_t n = p.contains("size") ? p["size"].get<std::size_t>() : pr_.ladders.front().sizes.back();
    if (ov_.sizes && !p.contains("size")) n = ov_.sizes->back();
    std::array<double, 4> r{};
    if (ov_.rect) {
      r = *ov_.rect;
    } else {
      for (int i = 0; i < 4; ++i) r[i] = p["rect"][i].get<double>();
    }
    std::size_t nx = p["grid"][0].get<std::size_t>(), ny = p["grid"][1].get<std::size_t>();
    if (ov_.grid) std::tie(nx, ny) = *ov_.grid;
    auto g = pseudospectrum_grid(builder_(n), r[0], r[1], r[2], r[3], nx, ny);
    g.section_size = n;
    csv_.emplace_back(claim("pseudo"), g.to_csv());
    const auto mx = std::min_element(g.values.begin(), g.values.end());
    o.summary.push_back("pseudo: n=" + std::to_string(n) + ", " + std::to_string(nx) + "x" +
                        std::to_string(ny) + " grid, smallest resolvent norm " + g17(*mx));
  }

  void probe(const Stage& st, StageOutcome& o) {
    const auto& lad = named(st.params, "ladder");
    const cplx z = lambda(st.params);
    auto r = region_probe(builder_, z, lad.sizes);
    Json j;
    j["stage"] = "probe";
    j["pointer"] = st.pointer;
    j["ladder"] = Json{{"name", lad.name}, {"sizes", lad.sizes}};
    j["probe"] = to_json(r);
    classify_.push_back(j);
    stage_files_.push_back("classify.json");
    o.summary.push_back("probe at λ=" + format_lambda(z) + " on " + lad.name + ": " + to_string(r.verdict));
  }

  static std::string describe(const ClassifiedPoint& c, const Ladder& cert, const Ladder* unc) {
    std::string s = "λ=" + format_lambda(c.value) + ": " + to_string(c.verdict);
    if (c.verdict == Verdict::kTrueEigenvalue) return s + "(" + std::to_string(c.multiplicity) + ")";
    if (c.verdict == Verdict::kSpurious && unc)
      return s + " (pollution of " + unc->name + " sections; " + cert.name + " sections bounded below)";
    if (!c.notes.empty()) s += " (" + c.notes.back() + ")";
    return s;
  }

  void classify(const Stage& st, StageOutcome& o) {
    const Json& p = st.params;
    const Ladder cert = ladder(named(p, "certified"));
    std::optional<Ladder> unc;
    if (p.contains("uncertified")) unc = ladder(pr_.ladder(p["uncertified"].get<std::string>()));
    const Window w = read_window(p);
    const double tol = p.value("tol", 1e-3);
    const std::size_t q = p.value("quadrature", std::size_t{64});

    Json j;
    j["stage"] = "classify";
    j["pointer"] = st.pointer;
    j["certified"] = ladder_json(cert);
    j["uncertified"] = unc ? ladder_json(*unc) : Json(nullptr);
    j["window"] = p.contains("window") ? Json(nums({w.re_min, w.re_max, w.im_min, w.im_max})) : Json(nullptr);
    j["tol"] = tol;
    j["quadrature"] = q;

    std::vector<ClassifiedPoint> points;
    if (p.contains("points") || ov_.lambda) {
      std::vector<cplx> zs;
      if (ov_.lambda) {
        zs.push_back(*ov_.lambda);
      } else {
        for (const auto& z : p["points"]) zs.push_back(read_complex(z));
      }
      std::vector<SpectrumResult> us;
      if (unc) us = ladder_spectra(*unc, w);
      ClassifyOptions opts;
      opts.tol = tol;
      opts.quadrature = q;
      const ComplexMatrix last = cert.sections(cert.sizes.back());
      opts.radius = clustering_radius(op_norm(last), tol);
      j["radius"] = num(opts.radius);
      const auto spectrum = eigenvalues(last);
      for (std::size_t i = 0; i < zs.size(); ++i) {
        std::vector<cplx> others;
        for (std::size_t k = 0; k < zs.size(); ++k)
          if (k != i) others.push_back(zs[k]);
        for (cplx z : spectrum)
          if (std::abs(z - zs[i]) > opts.radius) others.push_back(z);
        opts.contour_radius = auto_contour_radius(zs[i], others, opts.radius);
        opts.contour_blocked = !opts.contour_radius.has_value();
        points.push_back(classify_point(zs[i], cert, unc ? &us : nullptr, opts));
      }
    } else {
      auto rep = track_and_classify(cert, unc ? &*unc : nullptr, w, tol, q);
      j["radius"] = num(rep.radius);
      Json cands = Json::array();
      for (const auto& c : rep.candidates)
        cands.push_back(Json{{"value", cnum(c.value)}, {"multiplicity", c.multiplicity}, {"source", c.source}});
      j["candidates"] = cands;
      points = std::move(rep.points);
    }
    Json pts = Json::array();
    for (const auto& c : points) {
      pts.push_back(to_json(c));
      o.summary.push_back(describe(c, cert, unc ? &*unc : nullptr));
    }
    j["points"] = pts;
    classify_.push_back(j);
    stage_files_.push_back("classify.json");
    if (points.empty()) o.summary.push_back("classify: no candidates in the window");
  }

  void relbound(const Stage& st, StageOutcome& o) {
    const Json& p = st.params;
    const auto& lad = named(p, "ladder");
    const cplx z = lambda(p);
    const double margin = p.value("margin", kDefaultMargin);
    SectionBuilder t, s;
    TheoremTag tag = TheoremTag::kPerturbGSR;
    if (pr_.spec) {
      auto split = std::make_shared<BlockSplit>(split_blocks(*pr_.spec, cuts(p, lad.sizes.back() + 1)));
      t = [split](std::size_t k) { return split->t_section(k); };
      s = [split](std::size_t k) { return split->s_section(k); };
    } else if (pr_.sl_matrix) {
      tag = TheoremTag::kSLMatrix;
      const auto prob = *pr_.sl_matrix;
      const std::size_t m = pr_.grid;
      auto quad = [prob, m](std::size_t n, bool diag) {
        const auto b = sl_matrix_blocks(prob, n, m);
        const std::size_t r1 = b.a.rows(), r2 = b.d.rows();
        ComplexMatrix out(r1 + r2, r1 + r2);
        if (diag) {
          out.set_block(0, 0, b.a);
          out.set_block(r1, r1, b.d);
        } else {
          out.set_block(0, r1, b.b);
          out.set_block(r1, 0, b.c);
        }
        return out;
      };
      t = [quad](std::size_t n) { return quad(n, true); };
      s = [quad](std::size_t n) { return quad(n, false); };
    } else {
      tag = TheoremTag::kSchrodinger;
      auto full = *pr_.schrodinger;
      auto bare = full;
      bare.p = Coefficient::constant(0.0);
      bare.r = Coefficient::constant(0.0);
      const std::size_t m = pr_.grid;
      t = [bare, m](std::size_t n) { return schrodinger_assemble(bare, n, m).matrix; };
      s = [full, bare, m](std::size_t n) {
        auto a = schrodinger_assemble(full, n, m).matrix;
        a -= schrodinger_assemble(bare, n, m).matrix;
        return a;
      };
    }
    if (p.contains("tag")) tag = tag_from(p["tag"]);
    auto r = relative_bound(t, s, z, lad.sizes, tag, margin);
    hypothesis(st, o, r, "relative_bound");
    o.summary.back() += " (gamma = " + g17(r.constant("gamma_lambda")) + ")";
  }

  Problem pr_;
  fs::path out_;
  Overrides ov_;
  SectionBuilder builder_;
  std::vector<std::pair<std::string, std::string>> csv_;
  std::map<std::string, std::size_t> counts_;
  std::vector<std::string> stage_files_;
  Json classify_ = Json::array();
  Json hypothesis_ = Json::array();
};

}  // namespace

RunReport run(const Problem& problem, const fs::path& out_dir, const Overrides& overrides) {
  return Runner(problem, out_dir, overrides).go();
}

}  // namespace specexact::cli
