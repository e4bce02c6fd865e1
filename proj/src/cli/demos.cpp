#include <map>

#include "specexact/cli.hpp"
#include "specexact/errors.hpp"

namespace specexact::cli {

namespace {

const std::map<std::string, std::string>& gallery() {
  static const std::map<std::string, std::string> demos = {
      {"jacobi", R"({
  "kind": "jacobi",
  "name": "jacobi",
  "ladders": {
    "even": {"from": 2, "to": 40, "step": 2},
    "odd": {"from": 3, "to": 41, "step": 2},
    "split": {"from": 2, "to": 200, "step": 2}
  },
  "analysis": [
    {"stage": "spectra", "ladder": "odd", "window": [-1, 1, -1, 1]},
    {"stage": "classify", "certified": "even", "uncertified": "odd", "points": [0]},
    {"stage": "probe", "ladder": "odd", "lambda": 0},
    {"stage": "pseudo", "size": 40, "rect": [-2, 2, -1, 1], "grid": [41, 21]},
    {"stage": "relative_bound", "ladder": "split", "lambda": 0, "cuts": {"step": 2}},
    {"stage": "decay", "lambda": 0, "cuts": {"step": 2}, "blocks": {"from": 1, "to": 100}}
  ]
}
)"},
      {"upper_triangular", R"({
  "kind": "upper_triangular",
  "name": "upper_triangular",
  "ladders": {"sections": [50, 100, 150, 200]},
  "analysis": [
    {"stage": "band_profile", "scan": 200, "lambda": [0, 50]},
    {"stage": "relative_bound", "ladder": "sections", "lambda": [0, 50], "cuts": {"step": 1}},
    {"stage": "decay", "lambda": [0, 50], "cuts": {"step": 1}, "blocks": {"from": 1, "to": 30}}
  ]
}
)"},
      {"sl_matrix", R"({
  "kind": "sl_matrix",
  "name": "sl_matrix",
  "operator": {
    "tau1": {"p": 1, "q": 0, "a": 0, "b": 3.141592653589793, "a_n": {"rule": "a+1/n", "count": 100},
             "p_min": 1, "q_min": 0},
    "tau2": {"p": 1, "q": 0, "a": 0, "b": 3.141592653589793, "a_n": {"rule": "a+1/n", "count": 100},
             "p_min": 1, "q_min": 0},
    "gamma1": 1,
    "gamma2": 1,
    "m": 200
  },
  "ladders": {"n": {"from": 10, "to": 100, "step": 10}},
  "analysis": [
    {"stage": "spectra", "ladder": "n", "window": [0, 10, -1, 1]},
    {"stage": "classify", "certified": "n", "window": [0, 2, -1, 1], "tol": 1e-2},
    {"stage": "sl_coercivity"},
    {"stage": "sl_lambda0"},
    {"stage": "gamma_2x2", "ladder": "n", "lambda": "auto"},
    {"stage": "relative_bound", "ladder": "n", "lambda": "auto"}
  ]
}
)"},
      {"oscillator", R"({
  "kind": "schrodinger",
  "name": "oscillator",
  "operator": {"q": "x^2", "half_widths": [4, 5, 6, 7, 8, 9, 10], "m": 1600},
  "analysis": [
    {"stage": "classify", "certified": "main", "window": [0, 8, -1, 1], "tol": 1e-3},
    {"stage": "schrodinger_constants"},
    {"stage": "relative_bound", "ladder": "main", "lambda": "auto"}
  ]
}
)"},
      {"complex_oscillator", R"({
  "kind": "schrodinger",
  "name": "complex_oscillator",
  "operator": {"q": "i*x^2", "half_widths": [4, 5, 6, 7, 8, 9], "m": 400},
  "analysis": [
    {"stage": "classify", "certified": "main", "window": [0, 3, 0, 3], "tol": 1e-2},
    {"stage": "pseudo", "size": 5, "rect": [0, 4, 0, 4], "grid": [21, 21]},
    {"stage": "schrodinger_constants"},
    {"stage": "relative_bound", "ladder": "main", "lambda": "auto"}
  ]
}
)"},
  };
  return demos;
}

}  // namespace

std::vector<std::string> demo_names() {
  return {"jacobi", "upper_triangular", "sl_matrix", "oscillator", "complex_oscillator"};
}

const std::string& demo_problem(const std::string& name) {
  const auto& g = gallery();
  auto it = g.find(name);
  if (it == g.end()) {
    std::string known;
    for (const auto& n : demo_names()) known += (known.empty() ? "" : ", ") + n;
    throw ArgumentError("unknown demo '" + name + "'; known demos: " + known);
  }
  return it->second;
}

}  // namespace specexact::cli
