#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "specexact/discretize.hpp"
#include "specexact/matrix.hpp"
#include "specexact/operator_model.hpp"
#include "specexact/resolvent.hpp"

namespace specexact::cli {

using Json = nlohmann::ordered_json;

// 1-based line of every JSON pointer in a document, for error messages.
class LineLocator {
 public:
  explicit LineLocator(const std::string& text);
  // Line of the pointer, or of its nearest existing ancestor.
  std::size_t line(const std::string& pointer) const;

 private:
  std::map<std::string, std::size_t> lines_;
};

struct NamedLadder {
  std::string name;
  std::vector<std::size_t> sizes;
};

struct Stage {
  std::string kind;     // spectra, pseudo, probe, classify, relative_bound, ...
  std::string pointer;  // JSON pointer of the stage object
  Json params;
};

struct Problem {
  std::string kind;  // jacobi, upper_triangular, custom_banded, sl, sl_matrix, schrodinger
  std::string name;
  std::string source_path;
  std::string text;
  std::optional<OperatorSpec> spec;
  std::optional<SLProblem> sl;
  std::optional<SLMatrixProblem> sl_matrix;
  std::optional<SchrodingerProblem> schrodinger;
  std::size_t grid = 0;  // m for the differential kinds
  std::vector<NamedLadder> ladders;
  std::vector<Stage> stages;

  SectionBuilder sections() const;
  const NamedLadder& ladder(const std::string& name) const;  // ArgumentError if unknown
};

// ParseError (with JSON pointer and line) on malformed or invalid input.
Problem parse_problem(const std::string& text, const std::string& path = "<memory>");
Problem load_problem(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::vector<std::size_t>> sizes;  // replaces the first ladder
  std::optional<cplx> lambda;
  std::optional<std::array<double, 4>> rect;
  std::optional<std::pair<std::size_t, std::size_t>> grid;
};

struct StageOutcome {
  std::string kind;
  bool ok = true;
  std::string error;
  double seconds = 0.0;
  std::vector<std::string> summary;  // human-readable lines
};

struct RunReport {
  std::vector<StageOutcome> stages;
  std::vector<std::string> files;  // written data files, in order
  std::string input_hash;
  int exit_code = 0;
};

// Runs the analysis block in order and writes the data files and report.json
// into out_dir. Stage failures are recorded and the remaining stages still run.
RunReport run(const Problem& problem, const std::filesystem::path& out_dir,
              const Overrides& overrides = {});

// Replaces the analysis block by a single synthetic stage.
Problem with_stages(Problem problem, std::vector<Stage> stages);
Stage make_stage(const std::string& kind, Json params);

std::vector<std::string> demo_names();
// Problem text of a demo; ArgumentError listing the names when unknown.
const std::string& demo_problem(const std::string& name);

// Coefficient from the problem-file whitelist: a number, [re, im],
// "const <c>", "x", "x^2", "i*x^2", "exp(-x^2)" or {"table": {...}}.
Coefficient coefficient_from_json(const Json& j);

std::string format_lambda(cplx z);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace specexact::cli
