#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "specexact/cli.hpp"
#include "specexact/errors.hpp"
#include "specexact/parallel.hpp"

namespace sc = specexact::cli;

namespace {

std::vector<double> split_numbers(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw CLI::ValidationError(flag, "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

// "2,4,8" or "from:to[:step]"
std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::size_t> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stoul(item));
    if (parts.size() < 2 || parts.size() > 3 || (parts.size() == 3 && parts[2] == 0))
      throw CLI::ValidationError("--sizes", "expected from:to[:step]");
    for (std::size_t k = parts[0]; k <= parts[1]; k += parts.size() == 3 ? parts[2] : 1) out.push_back(k);
    return out;
  }
  for (double v : split_numbers(s, "--sizes")) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw CLI::ValidationError("--sizes", "sizes must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

struct Flags {
  std::string sizes, lambda, rect, grid, out;
  std::size_t threads = 0;

  void attach(CLI::App* app, const std::string& default_out) {
    out = default_out;
    app->add_option("--sizes", sizes, "replace the first ladder: 2,4,6 or from:to[:step]");
    app->add_option("--lambda", lambda, "spectral parameter: re or re,im");
    app->add_option("--rect", rect, "re_min,re_max,im_min,im_max");
    app->add_option("--grid", grid, "nx,ny");
    app->add_option("--out", out, "output directory")->capture_default_str();
    app->add_option("--threads", threads, "worker threads (default: SPECEXACT_THREADS)");
  }

  sc::Overrides overrides() const {
    sc::Overrides ov;
    if (!sizes.empty()) ov.sizes = parse_sizes(sizes);
    if (!lambda.empty()) {
      auto v = split_numbers(lambda, "--lambda");
      if (v.empty() || v.size() > 2) throw CLI::ValidationError("--lambda", "expected re or re,im");
      ov.lambda = specexact::cplx(v[0], v.size() == 2 ? v[1] : 0.0);
    }
    if (!rect.empty()) {
      auto v = split_numbers(rect, "--rect");
      if (v.size() != 4) throw CLI::ValidationError("--rect", "expected four numbers");
      ov.rect = std::array<double, 4>{v[0], v[1], v[2], v[3]};
    }
    if (!grid.empty()) {
      auto v = split_numbers(grid, "--grid");
      if (v.size() != 2 || v[0] < 2 || v[1] < 2) throw CLI::ValidationError("--grid", "expected nx,ny >= 2");
      ov.grid = std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]));
    }
    if (threads) specexact::set_thread_count(threads);
    return ov;
  }
};

int execute(const sc::Problem& prob, const Flags& f) {
  const auto rep = sc::run(prob, f.out, f.overrides());
  for (const auto& s : rep.stages)
    for (const auto& line : s.summary) (s.ok ? std::cout : std::cerr) << line << "\n";
  std::cout << "wrote " << rep.files.size() << " data files and report.json to " << f.out << "\n";
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specexact: spectral exactness checks for truncated operators"};
  app.require_subcommand(1);

  std::string file, demo_name;
  Flags run_f, demo_f, spec_f, pseudo_f, cls_f;

  auto* run = app.add_subcommand("run", "run the analysis block of a problem file");
  run->add_option("problem", file, "problem file (JSON)")->required();
  run_f.attach(run, "out");

  auto* demo = app.add_subcommand("demo", "run a built-in example");
  std::string names;
  for (const auto& n : sc::demo_names()) names += (names.empty() ? "" : ", ") + n;
  demo->add_option("name", demo_name, "one of: " + names)->required();
  demo_f.attach(demo, "");

  auto* spectra = app.add_subcommand("spectra", "section spectra along the first ladder");
  spectra->add_option("problem", file)->required();
  std::string window;
  spectra->add_option("--window", window, "re_min,re_max,im_min,im_max");
  spec_f.attach(spectra, "out");

  auto* pseudo = app.add_subcommand("pseudo", "resolvent norm grid of the largest section");
  pseudo->add_option("problem", file)->required();
  pseudo_f.attach(pseudo, "out");

  auto* classify = app.add_subcommand("classify", "track limits and classify them");
  classify->add_option("problem", file)->required();
  double tol = 1e-3;
  classify->add_option("--tol", tol, "Cauchy tolerance")->capture_default_str();
  classify->add_option("--window", window, "re_min,re_max,im_min,im_max");
  cls_f.attach(classify, "out");

  auto* verify = app.add_subcommand("verify", "parse and validate a problem file");
  verify->add_option("problem", file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto with_window = [&](specexact::cli::Json params) {
      if (!window.empty()) {
        auto v = split_numbers(window, "--window");
        if (v.size() != 4) throw CLI::ValidationError("--window", "expected four numbers");
        params["window"] = v;
      }
      return params;
    };
    if (*run) return execute(sc::load_problem(file), run_f);
    if (*demo) {
      const auto& text = sc::demo_problem(demo_name);
      if (demo_f.out.empty()) demo_f.out = "out/" + demo_name;
      return execute(sc::parse_problem(text, "demo:" + demo_name), demo_f);
    }
    if (*verify) {
      const auto prob = sc::load_problem(file);
      std::cout << file << ": ok (" << prob.kind << ", " << prob.ladders.size() << " ladders, "
                << prob.stages.size() << " stages)\n";
      return 0;
    }
    auto prob = sc::load_problem(file);
    if (prob.ladders.empty()) throw specexact::ArgumentError(file + ": no ladders");
    if (*spectra) {
      auto st = sc::make_stage("spectra", with_window({{"ladder", prob.ladders.front().name}}));
      return execute(sc::with_stages(prob, {st}), spec_f);
    }
    if (*pseudo) {
      if (pseudo_f.rect.empty()) throw CLI::ValidationError("--rect", "pseudo needs --rect");
      const std::string grid = pseudo_f.grid.empty() ? "41,41" : pseudo_f.grid;
      auto g = split_numbers(grid, "--grid");
      auto st = sc::make_stage("pseudo", {{"rect", split_numbers(pseudo_f.rect, "--rect")},
                                          {"grid", {g.at(0), g.at(1)}}});
      return execute(sc::with_stages(prob, {st}), pseudo_f);
    }
    sc::Json params = with_window({{"certified", prob.ladders.front().name}, {"tol", tol}});
    if (prob.ladders.size() > 1) params["uncertified"] = prob.ladders[1].name;
    return execute(sc::with_stages(prob, {sc::make_stage("classify", params)}), cls_f);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const specexact::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const specexact::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
