#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "specexact/cli.hpp"
#include "specexact/errors.hpp"

namespace specexact::cli {

namespace {

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

// Walks the raw text once, recording the line where each value starts.
class LineScanner {
 public:
  LineScanner(const std::string& s, std::map<std::string, std::size_t>& out) : s_(s), out_(out) {}
  void run() {
    try {
      value("");
    } catch (const std::out_of_range&) {
      // truncated input; the JSON parser reports the syntax error itself
    }
  }

 private:
  char peek() {
    skip();
    return s_.at(pos_);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      if (s_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }
  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (s_.at(pos_) != '"') {
      if (s_[pos_] == '\\') {
        ++pos_;
        const char e = s_.at(pos_);
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += s_[pos_];
      }
      ++pos_;
    }
    ++pos_;
    return out;
  }
  void value(const std::string& ptr) {
    const char c = peek();
    out_.emplace(ptr, line_);
    if (c == '{') {
      ++pos_;
      if (peek() == '}') {
        ++pos_;
        return;
      }
      for (;;) {
        if (peek() != '"') return;
        const std::string key = string_token();
        if (peek() != ':') return;
        ++pos_;
        value(ptr + "/" + escape_token(key));
        const char d = peek();
        ++pos_;
        if (d != ',') return;
      }
    } else if (c == '[') {
      ++pos_;
      if (peek() == ']') {
        ++pos_;
        return;
      }
      for (std::size_t k = 0;; ++k) {
        value(ptr + "/" + std::to_string(k));
        const char d = peek();
        ++pos_;
        if (d != ',') return;
      }
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < s_.size() && !std::strchr(",]} \t\r\n", s_[pos_])) ++pos_;
    }
  }

  const std::string& s_;
  std::map<std::string, std::size_t>& out_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

constexpr double kPi = std::numbers::pi;

class Reader {
 public:
  Reader(const std::string& path, const LineLocator& loc) : path_(path), loc_(loc) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ParseError(path_ + ": " + msg, ptr.empty() ? "/" : ptr, loc_.line(ptr));
  }

  const Json& req(const Json& obj, const std::string& ptr, const std::string& key) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(ptr, "missing field '" + key + "'");
    return *it;
  }
  const Json* opt(const Json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }
  void allow(const Json& obj, const std::string& ptr, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(ptr, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        fail(ptr + "/" + escape_token(k), "unknown field '" + k + "'");
    }
  }

  double number(const Json& j, const std::string& ptr) const {
    if (!j.is_number()) fail(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ptr, "number must be finite");
    return v;
  }
  double positive(const Json& j, const std::string& ptr) const {
    const double v = number(j, ptr);
    if (!(v > 0.0)) fail(ptr, "expected a positive number");
    return v;
  }
  std::size_t count(const Json& j, const std::string& ptr) const {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(ptr, "expected a nonnegative integer");
    return j.get<std::size_t>();
  }
  long integer(const Json& j, const std::string& ptr) const {
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    return j.get<long>();
  }
  std::string string(const Json& j, const std::string& ptr) const {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }
  cplx complex(const Json& j, const std::string& ptr) const {
    if (j.is_number()) return number(j, ptr);
    if (j.is_array() && j.size() == 2)
      return {number(j[0], ptr + "/0"), number(j[1], ptr + "/1")};
    if (j.is_object()) {
      allow(j, ptr, {"re", "im"});
      const Json* re = opt(j, "re");
      const Json* im = opt(j, "im");
      return {re ? number(*re, ptr + "/re") : 0.0, im ? number(*im, ptr + "/im") : 0.0};
    }
    fail(ptr, "expected a complex number: x, [re, im] or {\"re\", \"im\"}");
  }
  std::vector<double> numbers(const Json& j, const std::string& ptr) const {
    if (!j.is_array()) fail(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], ptr + "/" + std::to_string(k)));
    return out;
  }
  std::array<double, 4> rect(const Json& j, const std::string& ptr) const {
    const auto v = numbers(j, ptr);
    if (v.size() != 4) fail(ptr, "expected [re_min, re_max, im_min, im_max]");
    if (!(v[1] > v[0]) || !(v[3] > v[2])) fail(ptr, "degenerate rectangle");
    return {v[0], v[1], v[2], v[3]};
  }
  std::vector<std::size_t> sizes(const Json& j, const std::string& ptr) const {
    std::vector<std::size_t> out;
    if (j.is_array()) {
      for (std::size_t k = 0; k < j.size(); ++k) out.push_back(count(j[k], ptr + "/" + std::to_string(k)));
    } else if (j.is_object()) {
      allow(j, ptr, {"from", "to", "step"});
      const std::size_t from = count(req(j, ptr, "from"), ptr + "/from");
      const std::size_t to = count(req(j, ptr, "to"), ptr + "/to");
      const Json* st = opt(j, "step");
      const std::size_t step = st ? count(*st, ptr + "/step") : 1;
      if (step == 0) fail(ptr + "/step", "step must be positive");
      for (std::size_t k = from; k <= to; k += step) out.push_back(k);
    } else {
      fail(ptr, "expected a list of sizes or {\"from\", \"to\", \"step\"}");
    }
    if (out.empty()) fail(ptr, "empty ladder");
    if (out.front() == 0) fail(ptr, "sizes must be positive");
    for (std::size_t k = 1; k < out.size(); ++k)
      if (out[k] <= out[k - 1]) fail(ptr, "ladder sizes must increase strictly");
    return out;
  }
  Coefficient coefficient(const Json& j, const std::string& ptr) const {
    try {
      return coefficient_from_json(j);
    } catch (const ArgumentError& e) {
      fail(ptr, e.what());
    }
  }

 private:
  std::string path_;
  const LineLocator& loc_;
};

double sampled_sup(const Coefficient& c, double a, double b) {
  double s = 0.0;
  for (int k = 0; k <= 4000; ++k) s = std::max(s, std::abs(c(a + (b - a) * k / 4000.0)));
  return s;
}

SLProblem read_sl(const Reader& r, const Json& j, const std::string& ptr, bool with_grid) {
  if (with_grid)
    r.allow(j, ptr, {"p", "q", "a", "b", "beta", "a_n", "p_min", "q_min", "m"});
  else
    r.allow(j, ptr, {"p", "q", "a", "b", "beta", "a_n", "p_min", "q_min"});
  SLProblem p;
  p.p = r.coefficient(r.req(j, ptr, "p"), ptr + "/p");
  p.q = r.coefficient(r.req(j, ptr, "q"), ptr + "/q");
  p.a = r.number(r.req(j, ptr, "a"), ptr + "/a");
  p.b = r.number(r.req(j, ptr, "b"), ptr + "/b");
  if (!(p.b > p.a)) r.fail(ptr + "/b", "need a < b");
  if (const Json* beta = r.opt(j, "beta")) {
    p.beta = r.number(*beta, ptr + "/beta");
    if (!(p.beta >= 0.0 && p.beta < kPi)) r.fail(ptr + "/beta", "beta must lie in [0, pi)");
  }
  const Json& an = r.req(j, ptr, "a_n");
  const std::string aptr = ptr + "/a_n";
  if (an.is_array()) {
    p.a_n = r.numbers(an, aptr);
  } else if (an.is_object()) {
    r.allow(an, aptr, {"rule", "count"});
    const std::string rule = r.string(r.req(an, aptr, "rule"), aptr + "/rule");
    const std::size_t n = r.count(r.req(an, aptr, "count"), aptr + "/count");
    if (rule != "a+1/n") r.fail(aptr + "/rule", "only the rule \"a+1/n\" is known");
    for (std::size_t k = 1; k <= n; ++k) p.a_n.push_back(p.a + 1.0 / static_cast<double>(k));
  } else {
    r.fail(aptr, "expected a list of truncation points or {\"rule\", \"count\"}");
  }
  if (p.a_n.empty()) r.fail(aptr, "no truncation points");
  for (std::size_t k = 0; k < p.a_n.size(); ++k)
    if (!(p.a_n[k] >= p.a && p.a_n[k] < p.b))
      r.fail(aptr + "/" + std::to_string(k), "truncation point outside [a, b)");
  if (const Json* v = r.opt(j, "p_min")) p.p_min = r.positive(*v, ptr + "/p_min");
  if (const Json* v = r.opt(j, "q_min")) p.q_min = r.number(*v, ptr + "/q_min");
  return p;
}

}  // namespace

LineLocator::LineLocator(const std::string& text) { LineScanner(text, lines_).run(); }

std::size_t LineLocator::line(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 1;
    p.erase(p.rfind('/'));
  }
}

Coefficient coefficient_from_json(const Json& j) {
  if (j.is_number()) return Coefficient::constant(j.get<double>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Coefficient::constant(cplx(j[0].get<double>(), j[1].get<double>()));
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.rfind("const ", 0) == 0) {
      char* end = nullptr;
      const double c = std::strtod(s.c_str() + 6, &end);
      if (end == s.c_str() + 6 || *end != '\0') throw ArgumentError("bad constant in \"" + s + "\"");
      return Coefficient::constant(c);
    }
    if (s == "x") return Coefficient("x", [](double x) { return cplx(x); }, [](double) { return cplx(1.0); });
    if (s == "x^2")
      return Coefficient("x^2", [](double x) { return cplx(x * x); }, [](double x) { return cplx(2 * x); });
    if (s == "i*x^2")
      return Coefficient("i*x^2", [](double x) { return cplx(0, x * x); },
                         [](double x) { return cplx(0, 2 * x); });
    if (s == "exp(-x^2)")
      return Coefficient("exp(-x^2)", [](double x) { return cplx(std::exp(-x * x)); },
                         [](double x) { return cplx(-2 * x * std::exp(-x * x)); });
    throw ArgumentError("unknown coefficient \"" + s +
                        "\"; known: const <c>, x, x^2, i*x^2, exp(-x^2), a table");
  }
  if (j.is_object() && j.contains("table")) {
    const Json& t = j["table"];
    if (!t.is_object() || !t.contains("x") || !t.contains("values"))
      throw ArgumentError("a table needs \"x\" and \"values\"");
    std::vector<double> xs;
    std::vector<cplx> vs;
    for (const auto& x : t["x"]) {
      if (!x.is_number()) throw ArgumentError("table abscissae must be numbers");
      xs.push_back(x.get<double>());
    }
    for (const auto& v : t["values"]) {
      if (v.is_number())
        vs.push_back(v.get<double>());
      else if (v.is_array() && v.size() == 2)
        vs.push_back(cplx(v[0].get<double>(), v[1].get<double>()));
      else
        throw ArgumentError("table values must be numbers or [re, im]");
    }
    return Coefficient::table(xs, vs);
  }
  throw ArgumentError("expected a coefficient: number, [re, im], built-in name or table");
}

SectionBuilder Problem::sections() const {
  if (spec) return galerkin_builder(*spec);
  if (sl) {
    auto p = *sl;
    auto m = grid;
    return [p, m](std::size_t n) { return sl_assemble(p, n, m).matrix; };
  }
  if (sl_matrix) {
    auto p = *sl_matrix;
    auto m = grid;
    return [p, m](std::size_t n) { return sl_block_assemble(p, n, m).matrix; };
  }
  auto p = *schrodinger;
  auto m = grid;
  return [p, m](std::size_t n) { return schrodinger_assemble(p, n, m).matrix; };
}

const NamedLadder& Problem::ladder(const std::string& name) const {
  for (const auto& l : ladders)
    if (l.name == name) return l;
  throw ArgumentError("unknown ladder '" + name + "'");
}

Stage make_stage(const std::string& kind, Json params) {
  params["stage"] = kind;
  return Stage{kind, "", std::move(params)};
}

Problem with_stages(Problem problem, std::vector<Stage> stages) {
  problem.stages = std::move(stages);
  return problem;
}

Problem parse_problem(const std::string& text, const std::string& path) {
  const LineLocator loc(text);
  const Reader r(path, loc);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ParseError(path + ": malformed JSON: " + e.what(), "/", line);
  }
  r.allow(doc, "", {"kind", "name", "operator", "ladders", "analysis"});

  Problem pr;
  pr.source_path = path;
  pr.text = text;
  pr.kind = r.string(r.req(doc, "", "kind"), "/kind");
  pr.name = doc.contains("name") ? r.string(doc["name"], "/name") : pr.kind;
  const Json empty = Json::object();
  const Json& op = doc.contains("operator") ? doc["operator"] : empty;
  const std::string o = "/operator";

  if (pr.kind == "jacobi" || pr.kind == "upper_triangular") {
    r.allow(op, o, {});
    pr.spec = pr.kind == "jacobi" ? jacobi_spec() : upper_triangular_spec();
  } else if (pr.kind == "custom_banded") {
    r.allow(op, o, {"diagonals", "tail"});
    const Json& diags = r.req(op, o, "diagonals");
    if (!diags.is_array() || diags.empty()) r.fail(o + "/diagonals", "expected a non-empty array");
    std::vector<BandedDiagonal> ds;
    for (std::size_t k = 0; k < diags.size(); ++k) {
      const std::string dp = o + "/diagonals/" + std::to_string(k);
      r.allow(diags[k], dp, {"offset", "values"});
      BandedDiagonal d;
      d.offset = r.integer(r.req(diags[k], dp, "offset"), dp + "/offset");
      const Json& vals = r.req(diags[k], dp, "values");
      if (!vals.is_array() || vals.empty()) r.fail(dp + "/values", "expected a non-empty array");
      for (std::size_t i = 0; i < vals.size(); ++i)
        d.values.push_back(r.complex(vals[i], dp + "/values/" + std::to_string(i)));
      ds.push_back(std::move(d));
    }
    TailRule tail = TailRule::kZero;
    if (op.contains("tail")) {
      const std::string t = r.string(op["tail"], o + "/tail");
      if (t == "zero") tail = TailRule::kZero;
      else if (t == "constant") tail = TailRule::kConstant;
      else if (t == "periodic") tail = TailRule::kPeriodic;
      else if (t == "linear") tail = TailRule::kLinear;
      else r.fail(o + "/tail", "tail must be zero, constant, periodic or linear");
    }
    try {
      pr.spec = custom_banded_spec(pr.name, std::move(ds), tail);
    } catch (const ArgumentError& e) {
      r.fail(o + "/diagonals", e.what());
    }
  } else if (pr.kind == "sl") {
    pr.sl = read_sl(r, op, o, true);
    pr.grid = r.count(r.req(op, o, "m"), o + "/m");
    pr.ladders.push_back({"main", {}});
    for (std::size_t k = 1; k <= pr.sl->a_n.size(); ++k) pr.ladders.back().sizes.push_back(k);
  } else if (pr.kind == "sl_matrix") {
    r.allow(op, o, {"tau1", "tau2", "gamma1", "gamma2", "s", "t", "u", "v", "s_sup", "t_sup",
                    "u_sup", "v_sup", "m"});
    SLMatrixProblem mp;
    mp.tau1 = read_sl(r, r.req(op, o, "tau1"), o + "/tau1", false);
    mp.tau2 = read_sl(r, r.req(op, o, "tau2"), o + "/tau2", false);
    if (op.contains("gamma1")) mp.gamma1 = r.complex(op["gamma1"], o + "/gamma1");
    if (op.contains("gamma2")) mp.gamma2 = r.complex(op["gamma2"], o + "/gamma2");
    const double lo = mp.tau1.a, hi = mp.tau1.b;
    auto coef = [&](const char* key, Coefficient& c, double& sup) {
      const std::string sup_key = std::string(key) + "_sup";
      if (op.contains(key)) {
        c = r.coefficient(op[key], o + "/" + key);
        sup = sampled_sup(c, lo, hi);
      }
      if (op.contains(sup_key)) {
        const double declared = r.number(op[sup_key], o + "/" + sup_key);
        if (declared < sup * (1 - 1e-12))
          r.fail(o + "/" + sup_key, "declared sup norm is below the sampled maximum of " + std::string(key));
        sup = declared;
      }
    };
    coef("s", mp.s, mp.s_sup);
    coef("t", mp.t, mp.t_sup);
    coef("u", mp.u, mp.u_sup);
    coef("v", mp.v, mp.v_sup);
    pr.sl_matrix = mp;
    pr.grid = r.count(r.req(op, o, "m"), o + "/m");
    pr.ladders.push_back({"main", {}});
    for (std::size_t k = 1; k <= mp.tau1.a_n.size(); ++k) pr.ladders.back().sizes.push_back(k);
  } else if (pr.kind == "schrodinger") {
    r.allow(op, o, {"p", "q", "r", "half_widths", "m", "declared"});
    SchrodingerProblem sp;
    sp.p = op.contains("p") ? r.coefficient(op["p"], o + "/p") : Coefficient::constant(0.0);
    sp.q = r.coefficient(r.req(op, o, "q"), o + "/q");
    sp.r = op.contains("r") ? r.coefficient(op["r"], o + "/r") : Coefficient::constant(0.0);
    sp.half_widths = r.numbers(r.req(op, o, "half_widths"), o + "/half_widths");
    if (sp.half_widths.empty()) r.fail(o + "/half_widths", "no half widths");
    for (std::size_t k = 0; k < sp.half_widths.size(); ++k) {
      if (!(sp.half_widths[k] > 0.0)) r.fail(o + "/half_widths/" + std::to_string(k), "must be positive");
      if (k > 0 && !(sp.half_widths[k] > sp.half_widths[k - 1]))
        r.fail(o + "/half_widths/" + std::to_string(k), "half widths must increase strictly");
    }
    if (op.contains("declared")) {
      const std::string dp = o + "/declared";
      const Json& d = op["declared"];
      r.allow(d, dp, {"a_grad", "b_grad", "a_r", "b_r"});
      auto get = [&](const char* k) -> std::optional<double> {
        if (!d.contains(k)) return std::nullopt;
        const double v = r.number(d[k], dp + "/" + k);
        if (v < 0.0) r.fail(dp + "/" + k, "constants must be nonnegative");
        return v;
      };
      sp.declared = {get("a_grad"), get("b_grad"), get("a_r"), get("b_r")};
    }
    pr.schrodinger = sp;
    pr.grid = r.count(r.req(op, o, "m"), o + "/m");
    if (pr.grid < 4) r.fail(o + "/m", "need m >= 4");
    pr.ladders.push_back({"main", {}});
    for (std::size_t k = 1; k <= sp.half_widths.size(); ++k) pr.ladders.back().sizes.push_back(k);
  } else {
    r.fail("/kind", "unknown kind '" + pr.kind +
                        "'; expected jacobi, upper_triangular, custom_banded, sl, sl_matrix or schrodinger");
  }
  if ((pr.sl || pr.sl_matrix) && pr.grid < 2) r.fail(o + "/m", "need m >= 2");

  if (doc.contains("ladders")) {
    const Json& ls = doc["ladders"];
    if (!ls.is_object()) r.fail("/ladders", "expected an object of named ladders");
    const std::size_t limit = pr.ladders.empty() ? 0 : pr.ladders.front().sizes.size();
    pr.ladders.clear();
    for (const auto& [name, val] : ls.items()) {
      const std::string lp = "/ladders/" + escape_token(name);
      auto sizes = r.sizes(val, lp);
      if (limit && sizes.back() > limit)
        r.fail(lp, "ladder index " + std::to_string(sizes.back()) + " exceeds the " +
                       std::to_string(limit) + " truncation parameters");
      pr.ladders.push_back({name, std::move(sizes)});
    }
  }

  auto ladder_ref = [&](const Json& st, const std::string& sp, const char* key, bool required) {
    if (!st.contains(key)) {
      if (required && pr.ladders.empty()) r.fail(sp, std::string("missing field '") + key + "'");
      return;
    }
    const std::string name = r.string(st[key], sp + "/" + key);
    if (std::none_of(pr.ladders.begin(), pr.ladders.end(),
                     [&](const NamedLadder& l) { return l.name == name; }))
      r.fail(sp + "/" + key, "unknown ladder '" + name + "'");
  };
  auto lambda_field = [&](const Json& st, const std::string& sp, bool auto_ok) {
    if (!st.contains("lambda")) return;
    if (st["lambda"].is_string()) {
      if (st["lambda"] != "auto" || !auto_ok)
        r.fail(sp + "/lambda", auto_ok ? "lambda must be a complex number or \"auto\""
                                       : "lambda must be a complex number");
      return;
    }
    r.complex(st["lambda"], sp + "/lambda");
  };
  const bool galerkin = pr.spec.has_value();
  const bool auto_lambda = pr.sl_matrix || pr.schrodinger;

  if (doc.contains("analysis")) {
    const Json& an = doc["analysis"];
    if (!an.is_array()) r.fail("/analysis", "expected an array of stages");
    for (std::size_t k = 0; k < an.size(); ++k) {
      const std::string sp = "/analysis/" + std::to_string(k);
      const Json& st = an[k];
      const std::string kind = r.string(r.req(st, sp, "stage"), sp + "/stage");
      auto need = [&](bool ok, const char* what) {
        if (!ok) r.fail(sp + "/stage", "stage '" + kind + "' needs " + what);
      };
      if (kind == "spectra") {
        r.allow(st, sp, {"stage", "ladder", "window"});
        ladder_ref(st, sp, "ladder", true);
        if (st.contains("window")) r.rect(st["window"], sp + "/window");
      } else if (kind == "pseudo") {
        r.allow(st, sp, {"stage", "size", "rect", "grid"});
        if (st.contains("size")) r.count(st["size"], sp + "/size");
        else need(!pr.ladders.empty(), "a size or a ladder");
        r.rect(r.req(st, sp, "rect"), sp + "/rect");
        const Json& g = r.req(st, sp, "grid");
        if (!g.is_array() || g.size() != 2) r.fail(sp + "/grid", "expected [nx, ny]");
        if (r.count(g[0], sp + "/grid/0") < 2 || r.count(g[1], sp + "/grid/1") < 2)
          r.fail(sp + "/grid", "need at least 2 x 2 nodes");
      } else if (kind == "probe") {
        r.allow(st, sp, {"stage", "ladder", "lambda"});
        ladder_ref(st, sp, "ladder", true);
        r.req(st, sp, "lambda");
        lambda_field(st, sp, false);
      } else if (kind == "classify") {
        r.allow(st, sp, {"stage", "certified", "uncertified", "window", "tol", "quadrature", "points"});
        ladder_ref(st, sp, "certified", true);
        ladder_ref(st, sp, "uncertified", false);
        if (st.contains("window")) r.rect(st["window"], sp + "/window");
        if (st.contains("tol")) r.positive(st["tol"], sp + "/tol");
        if (st.contains("quadrature") && r.count(st["quadrature"], sp + "/quadrature") < 16)
          r.fail(sp + "/quadrature", "need at least 16 quadrature points");
        if (st.contains("points")) {
          if (!st["points"].is_array()) r.fail(sp + "/points", "expected an array of complex numbers");
          for (std::size_t i = 0; i < st["points"].size(); ++i)
            r.complex(st["points"][i], sp + "/points/" + std::to_string(i));
        }
      } else if (kind == "relative_bound") {
        r.allow(st, sp, {"stage", "ladder", "lambda", "cuts", "margin", "tag"});
        need(galerkin ? st.contains("cuts") : (pr.sl_matrix || pr.schrodinger),
             galerkin ? "\"cuts\" for the block split" : "an operator with a natural split");
        ladder_ref(st, sp, "ladder", true);
        r.req(st, sp, "lambda");
        lambda_field(st, sp, auto_lambda);
      } else if (kind == "gamma_2x2") {
        r.allow(st, sp, {"stage", "ladder", "lambda", "margin"});
        need(pr.sl_matrix.has_value(), "an sl_matrix problem");
        ladder_ref(st, sp, "ladder", true);
        r.req(st, sp, "lambda");
        lambda_field(st, sp, true);
      } else if (kind == "decay") {
        r.allow(st, sp, {"stage", "lambda", "cuts", "blocks", "tag"});
        need(galerkin, "a matrix operator");
        r.req(st, sp, "cuts");
        r.sizes(r.req(st, sp, "blocks"), sp + "/blocks");
        r.req(st, sp, "lambda");
        lambda_field(st, sp, false);
        if (st.contains("tag")) {
          const std::string t = r.string(st["tag"], sp + "/tag");
          if (t != "DiagonalDecay" && t != "Galerkin") r.fail(sp + "/tag", "tag must be DiagonalDecay or Galerkin");
        }
      } else if (kind == "band_profile") {
        r.allow(st, sp, {"stage", "scan", "lambda"});
        need(galerkin, "a matrix operator");
        if (r.count(r.req(st, sp, "scan"), sp + "/scan") < 2) r.fail(sp + "/scan", "scan must be at least 2");
        r.req(st, sp, "lambda");
        lambda_field(st, sp, false);
      } else if (kind == "sl_lambda0") {
        r.allow(st, sp, {"stage"});
        need(pr.sl_matrix.has_value(), "an sl_matrix problem");
      } else if (kind == "sl_coercivity") {
        r.allow(st, sp, {"stage"});
        need(pr.sl || pr.sl_matrix, "an sl or sl_matrix problem");
      } else if (kind == "schrodinger_constants") {
        r.allow(st, sp, {"stage", "audit_points"});
        need(pr.schrodinger.has_value(), "a schrodinger problem");
        if (st.contains("audit_points") && r.count(st["audit_points"], sp + "/audit_points") < 2)
          r.fail(sp + "/audit_points", "need at least 2 audit points");
      } else {
        r.fail(sp + "/stage", "unknown stage '" + kind + "'");
      }
      if (st.contains("cuts")) {
        const Json& c = st["cuts"];
        if (c.is_object()) {
          r.allow(c, sp + "/cuts", {"step"});
          if (r.count(r.req(c, sp + "/cuts", "step"), sp + "/cuts/step") == 0)
            r.fail(sp + "/cuts/step", "step must be positive");
        } else {
          r.sizes(c, sp + "/cuts");
        }
      }
      if (st.contains("margin")) {
        const double m = r.positive(st["margin"], sp + "/margin");
        if (m >= 1.0) r.fail(sp + "/margin", "margin must be below 1");
      }
      pr.stages.push_back(Stage{kind, sp, st});
    }
  }
  return pr;
}

Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), "/", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str(), path.string());
}

std::string format_lambda(cplx z) {
  auto part = [](double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  const double scale = std::max(1.0, std::abs(z));
  const bool has_im = std::abs(z.imag()) > 1e-12 * scale;
  const bool has_re = std::abs(z.real()) > 1e-12 * scale;
  if (!has_im) return part(z.real());
  const std::string im = part(std::abs(z.imag())) + "i";
  if (!has_re) return (z.imag() < 0 ? "-" : "") + im;
  return part(z.real()) + (z.imag() < 0 ? " - " : " + ") + im;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace specexact::cli
