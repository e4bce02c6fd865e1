#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "specexact/cli.hpp"
#include "specexact/errors.hpp"

using namespace specexact;
using namespace specexact::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("specexact_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t error_line(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const char* kLaplacian = R"({
  "kind": "sl",
  "operator": {"p": 1, "q": 0, "a": 0, "b": 3.141592653589793, "a_n": [0], "m": 400},
  "analysis": [{"stage": "spectra"}]
})";

}  // namespace

TEST_CASE("parse errors point at the offending line") {
  CHECK(error_line("{\n  \"kind\": \"jacobi\",\n  \"ladders\": {\"a\": [1, 2]},\n  \"analysis\": [\n"
                   "    {\"stage\": \"spectra\", \"ladder\": \"b\"}\n  ]\n}") == 5);
  CHECK(error_line("{\n  \"kind\": \"jacobi\",\n  \"ladders\": {\n    \"a\": [1, 3, 2]\n  }\n}") == 4);
  CHECK(error_line("{\n  \"kind\": \"jacobi\",\n\n  \"colour\": 1\n}") == 4);
  CHECK(error_line("{\n  \"kind\": \"jacobi\",\n  \"ladders\": {\"a\": [1, 2,]}\n}") == 3);
  CHECK(error_line("{\"kind\": \"nope\"}") == 1);
  try {
    parse_problem("{\"kind\": \"jacobi\", \"ladders\": {\"a\": [2, 4]},\n"
                  "\"analysis\": [{\"stage\": \"classify\", \"certified\": \"a\", \"tol\": -1}]}");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.path() == "/analysis/0/tol");
    CHECK(e.line() == 2);
  }
}

TEST_CASE("schema checks") {
  CHECK_THROWS_AS(parse_problem(R"({"kind": "jacobi", "analysis": [{"stage": "gamma_2x2"}]})"), ParseError);
  CHECK_THROWS_AS(parse_problem(R"({"kind": "jacobi", "analysis": [{"stage": "spectra"}]})"), ParseError);
  CHECK_THROWS_AS(parse_problem(R"({"kind": "jacobi", "ladders": {"a": {"from": 5, "to": 2}}})"), ParseError);
  CHECK_THROWS_AS(parse_problem(R"({"kind": "jacobi", "ladders": {"a": [0, 1]}})"), ParseError);
  // ladder indices of a differential problem address its truncation points
  CHECK_THROWS_AS(parse_problem(R"({"kind": "sl", "operator": {"p": 1, "q": 0, "a": 0, "b": 1,
                                    "a_n": [0.5, 0.2], "m": 50}, "ladders": {"x": [1, 2, 3]}})"),
                  ParseError);
  auto p = parse_problem(R"({"kind": "jacobi", "ladders": {"a": {"from": 2, "to": 10, "step": 4}}})");
  CHECK(p.ladders.front().sizes == std::vector<std::size_t>{2, 6, 10});
  auto sl = parse_problem(R"({"kind": "sl", "operator": {"p": 1, "q": "x^2", "a": 0, "b": 2,
                              "a_n": {"rule": "a+1/n", "count": 4}, "m": 50}})");
  CHECK(sl.sl->a_n.back() == 0.25);
  CHECK(sl.ladders.front().sizes == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("coefficients come from the whitelist only") {
  CHECK(coefficient_from_json(Json("x^2"))(3.0) == cplx(9.0));
  CHECK(coefficient_from_json(Json("i*x^2"))(2.0) == cplx(0.0, 4.0));
  CHECK(coefficient_from_json(Json("exp(-x^2)")).derivative(1.0).real() == doctest::Approx(-2 * std::exp(-1.0)));
  CHECK(coefficient_from_json(Json("const -2.5"))(7.0) == cplx(-2.5));
  CHECK(coefficient_from_json(Json::array({1.0, -1.0}))(0.0) == cplx(1.0, -1.0));
  auto t = coefficient_from_json(Json::parse(R"({"table": {"x": [0, 1], "values": [0, [2, 2]]}})"));
  CHECK(t(0.5) == cplx(1.0, 1.0));
  CHECK_THROWS_AS(coefficient_from_json(Json("2*x")), ArgumentError);
  CHECK_THROWS_AS(coefficient_from_json(Json("const 2x")), ArgumentError);
  CHECK_THROWS_AS(parse_problem(R"({"kind": "schrodinger", "operator": {"q": "x^4", "half_widths": [1], "m": 8}})"),
                  ParseError);
}

TEST_CASE("empty analysis block") {
  auto dir = scratch("empty");
  auto rep = run(parse_problem(R"({"kind": "jacobi"})"), dir);
  CHECK(rep.exit_code == 0);
  CHECK(rep.stages.empty());
  auto report = Json::parse(slurp(dir / "report.json"));
  CHECK(report["stages"].empty());
  CHECK(report["exit_code"] == 0);
  CHECK(report["input_hash"] == fnv1a_hex(R"({"kind": "jacobi"})"));
}

TEST_CASE("Dirichlet Laplacian spectra") {
  auto dir = scratch("laplacian");
  auto rep = run(parse_problem(kLaplacian), dir);
  REQUIRE(rep.exit_code == 0);
  std::istringstream csv(slurp(dir / "spectra.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,re,im,residual");
  std::vector<double> re;
  while (std::getline(csv, line) && re.size() < 3) {
    std::istringstream row(line);
    std::string n, x;
    std::getline(row, n, ',');
    std::getline(row, x, ',');
    re.push_back(std::stod(x));
  }
  REQUIRE(re.size() == 3);
  CHECK(std::abs(re[0] - 1.0) < 1e-3);
  CHECK(std::abs(re[1] - 4.0) < 1e-3);
  CHECK(std::abs(re[2] - 9.0) < 1e-3);
}

TEST_CASE("Jacobi run flags pollution at zero") {
  auto dir = scratch("jacobi");
  auto prob = parse_problem(R"({"kind": "jacobi",
    "ladders": {"even": {"from": 2, "to": 40, "step": 2}, "odd": {"from": 3, "to": 41, "step": 2}},
    "analysis": [{"stage": "classify", "certified": "even", "uncertified": "odd", "points": [0]}]})");
  auto rep = run(prob, dir);
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.stages[0].summary.front() ==
        "λ=0: Spurious (pollution of odd sections; even sections bounded below)");
  auto j = Json::parse(slurp(dir / "classify.json"));
  const auto& pt = j["entries"][0]["points"][0];
  CHECK(pt["verdict"] == "Spurious");
  CHECK(pt["value"] == Json::array({0.0, 0.0}));
  CHECK(pt["uncertified_hits"] == 20);
}

TEST_CASE("failed stages are recorded and the rest still run") {
  auto dir = scratch("failing");
  auto prob = parse_problem(R"({"kind": "jacobi", "ladders": {"short": [2, 4, 6]},
    "analysis": [{"stage": "probe", "ladder": "short", "lambda": 0}, {"stage": "spectra"}]})");
  auto rep = run(prob, dir);
  CHECK(rep.exit_code != 0);
  REQUIRE(rep.stages.size() == 2);
  CHECK(!rep.stages[0].ok);
  CHECK(rep.stages[1].ok);
  CHECK(fs::exists(dir / "spectra.csv"));
  auto report = Json::parse(slurp(dir / "report.json"));
  CHECK(report["stages"][0]["status"] == "error");
  CHECK(report["stages"][1]["status"] == "ok");
  CHECK(report["exit_code"] == 1);
}

TEST_CASE("overrides") {
  auto dir = scratch("overrides");
  Overrides ov;
  ov.sizes = std::vector<std::size_t>{3, 5};
  auto prob = parse_problem(R"({"kind": "jacobi", "ladders": {"a": [2, 4]}, "analysis": [{"stage": "spectra"}]})");
  run(prob, dir, ov);
  const auto csv = slurp(dir / "spectra.csv");
  CHECK(csv.find("\n3,") != std::string::npos);
  CHECK(csv.find("\n2,") == std::string::npos);
  ov.sizes = std::vector<std::size_t>{5, 3};
  CHECK_THROWS_AS(run(prob, dir, ov), ArgumentError);
}

TEST_CASE("data files are reproducible") {
  auto prob = parse_problem(demo_problem("jacobi"));
  prob.stages.resize(4);  // through the pseudospectrum
  auto a = scratch("repro_a"), b = scratch("repro_b");
  auto ra = run(prob, a);
  auto rb = run(prob, b);
  REQUIRE(ra.files == rb.files);
  CHECK(ra.files.size() == 3);
  for (const auto& f : ra.files) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("every number survives the CSV round trip") {
  auto dir = scratch("roundtrip");
  auto prob = parse_problem(R"({"kind": "jacobi",
    "analysis": [{"stage": "pseudo", "size": 7, "rect": [-0.3, 0.7, 0.1, 0.9], "grid": [3, 4]}]})");
  run(prob, dir);
  const auto csv = slurp(dir / "pseudo.csv");
  const auto m = truncate(jacobi_spec(), 7).matrix;
  auto g = pseudospectrum_grid(m, -0.3, 0.7, 0.1, 0.9, 3, 4);
  g.section_size = 7;
  CHECK(csv == g.to_csv());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::size_t k = 0;
  while (std::getline(in, line)) {
    const auto v = line.substr(line.rfind(',') + 1);
    CHECK(std::strtod(v.c_str(), nullptr) == g.values[k++]);
  }
  CHECK(k == 12);
}

TEST_CASE("demo gallery") {
  for (const auto& n : demo_names()) CHECK_NOTHROW(parse_problem(demo_problem(n), n));
  try {
    demo_problem("nope");
    FAIL("no error");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("complex_oscillator") != std::string::npos);
  }
}

TEST_CASE("formatting helpers") {
  CHECK(format_lambda(0.0) == "0");
  CHECK(format_lambda(cplx(0, 50)) == "50i");
  CHECK(format_lambda(cplx(1.5, -2)) == "1.5 - 2i");
  CHECK(format_lambda(cplx(0, -1)) == "-1i");
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
