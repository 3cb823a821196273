// rcas: command line front end for the series solver.
//
//   rcas solve <config> [--grid x=-5:1:5;t=0.1,0.5,1] [--csv out.csv] [--out report.txt]
//   rcas table <config> --n 5 --xs -5:1:5 --ts 0.1,0.5,1 [--out table.csv]
//   rcas bound <config> --L1 0.02 --q-max 4
//   rcas demo <name>
//
// A <config> is a file path or the name of a packaged problem (example1, ...).
// Exit status: 0 success, 1 configuration or usage error, 2 computation error,
// 3 failed demo assertion.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rcas/report.hpp"
#include "rcas_builtin_configs.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCompute = 2;
constexpr int kExitAssertion = 3;

std::optional<std::string_view> builtin_config(std::string name) {
  if (name.size() > 4 && name.ends_with(".cfg")) name.resize(name.size() - 4);
  for (const auto& [n, text] : rcas::builtin::kConfigs) {
    if (n == name) return text;
  }
  return std::nullopt;
}

std::string builtin_list() {
  std::string out;
  for (const auto& [n, text] : rcas::builtin::kConfigs) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

rcas::ProblemConfig read_config(const std::string& source) {
  if (std::filesystem::is_regular_file(source)) return rcas::load_config(source);
  if (auto text = builtin_config(source)) return rcas::parse_config(*text);
  throw rcas::ConfigError("cannot read config '" + source + "' (not a file or one of " +
                          builtin_list() + ")");
}

/// Runs `body` with the stream selected by --out, or stdout.
template <typename F>
void with_output(const std::string& path, F&& body) {
  if (path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rcas::ConfigError("cannot write '" + path + "'");
  body(out);
}

struct SolveArgs {
  std::string config;
  std::string out;
  std::string grid;
  std::string csv;
  int precision = rcas::kCsvDigits;
  int n_max = -1;
  bool raw = false;
};

int cmd_solve(const SolveArgs& a) {
  const rcas::BuiltProblem bp = rcas::build_problem(read_config(a.config));
  const int n_max = a.n_max >= 0 ? a.n_max : bp.n_max;
  const rcas::SeriesSolution sol = rcas::solve(bp.spec, n_max);
  with_output(a.out, [&](std::ostream& os) { rcas::write_solution_report(os, bp, sol, a.raw); });
  if (!a.grid.empty()) {
    const rcas::Grid g = rcas::make_grid(rcas::parse_grid(a.grid), bp.variables);
    auto body = [&](std::ostream& os) {
      rcas::write_solution_csv(os, sol, sol.highest(), bp.spec.exact, g, bp.variables,
                               a.precision);
    };
    if (a.csv.empty() && !a.out.empty()) {
      with_output(a.out + ".csv", body);
    } else {
      if (a.csv.empty()) std::cout << '\n';
      with_output(a.csv, body);
    }
  }
  return kExitOk;
}

struct TableArgs {
  std::string config;
  std::string out;
  std::string xs;
  std::string ts;
  std::string grid;
  int n = -1;
  int precision = rcas::kCsvDigits;
};

int cmd_table(const TableArgs& a) {
  const rcas::BuiltProblem bp = rcas::build_problem(read_config(a.config));
  if (!bp.spec.exact) throw rcas::MissingExact("table needs an exact solution in the config");
  rcas::Grid g;
  if (!a.grid.empty()) {
    g = rcas::make_grid(rcas::parse_grid(a.grid), bp.variables);
  } else {
    if (bp.variables.size() != 1) {
      throw rcas::ConfigError("--xs covers one variable; use --grid for " +
                              std::to_string(bp.variables.size()) + " variables");
    }
    if (a.xs.empty() || a.ts.empty()) throw rcas::ConfigError("table needs --xs and --ts");
    for (double x : rcas::parse_axis(a.xs)) g.points.push_back({x});
    g.times = rcas::parse_axis(a.ts);
  }
  const int n = a.n >= 0 ? a.n : bp.n_max;
  const rcas::SeriesSolution sol = rcas::solve(bp.spec, std::max(n, bp.n_max));
  const rcas::ErrorTable table = rcas::error_table(sol, *bp.spec.exact, g.points, g.times, n);
  with_output(a.out, [&](std::ostream& os) {
    rcas::write_error_csv(os, table, bp.variables, a.precision);
  });
  return kExitOk;
}

struct BoundArgs {
  std::string config;
  std::string out;
  std::optional<double> L1;
  double radius = 0.0;
  int q_max = 4;
  int precision = rcas::kCsvDigits;
};

int cmd_bound(const BoundArgs& a) {
  const rcas::BuiltProblem bp = rcas::build_problem(read_config(a.config));
  if (a.q_max < 0) throw rcas::ConfigError("--q-max must be non-negative");
  const rcas::SeriesSolution sol = rcas::solve(bp.spec, 0);
  double L1 = 0.0;
  bool estimated = false;
  if (a.L1) {
    L1 = *a.L1;
  } else {
    // Heuristic: the ball holds twice the leading term's amplitude.
    const double radius = a.radius > 0.0 ? a.radius : 2.0 * std::max(sol.plan.scale, 1e-3);
    L1 = rcas::estimate_L1(bp.spec.nonlinearity, bp.spec.domain, radius);
    estimated = true;
    if (!(L1 > 0.0)) throw rcas::ConfigError("estimated L1 is zero; pass --L1");
  }
  const rcas::ConvergenceReport r = rcas::convergence_report(bp.spec, sol, L1, a.q_max, estimated);
  if (!r.contractive) {
    std::cerr << "warning: alpha = " << rcas::format_sig(r.alpha, a.precision)
              << " is not below 1; the truncation bound does not apply\n";
  }
  with_output(a.out, [&](std::ostream& os) {
    rcas::write_convergence_report(os, r, a.q_max, a.precision);
  });
  return kExitOk;
}

int cmd_demo(const std::string& name) {
  const auto& names = rcas::demo_names();
  const auto text = builtin_config(name);
  if (std::find(names.begin(), names.end(), name) == names.end() || !text) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    std::cerr << "error: unknown demo '" << name << "'; valid names: " << valid << '\n';
    return kExitConfig;
  }
  const rcas::DemoResult r = rcas::run_demo(name, *text);
  rcas::write_solution_report(std::cout, r.problem, r.solution, false);
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.what << ": " << c.detail << '\n';
  }
  std::cout << (r.passed() ? "demo " + name + " passed\n" : "demo " + name + " FAILED\n");
  return r.passed() ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rapidly convergent series solutions of nonlinear initial value problems"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve a problem and print its corrections");
  solve->add_option("config", solve_args.config, "config file or packaged problem name")
      ->required();
  solve->add_option("--out", solve_args.out, "write the report here instead of stdout");
  solve->add_option("--grid", solve_args.grid, "sample grid, e.g. \"x=-5:1:5;t=0.1,0.5,1\"");
  solve->add_option("--csv", solve_args.csv, "write grid samples here");
  solve->add_option("--precision", solve_args.precision, "significant digits in CSV")
      ->check(CLI::Range(1, 17));
  solve->add_option("--n-max", solve_args.n_max, "override the config's n_max")
      ->check(CLI::NonNegativeNumber);
  solve->add_flag("--raw", solve_args.raw, "also list every time key with its coefficient");

  TableArgs table_args;
  auto* table = app.add_subcommand("table", "absolute error table of a partial sum");
  table->add_option("config", table_args.config, "config file or packaged problem name")
      ->required();
  table->add_option("--n", table_args.n, "partial sum index (default n_max)")
      ->check(CLI::NonNegativeNumber);
  table->add_option("--xs", table_args.xs, "x values: lo:step:hi or a comma list");
  table->add_option("--ts", table_args.ts, "t values: lo:step:hi or a comma list");
  table->add_option("--grid", table_args.grid, "full grid for several variables");
  table->add_option("--out", table_args.out, "write the CSV here instead of stdout");
  table->add_option("--precision", table_args.precision, "significant digits")
      ->check(CLI::Range(1, 17));

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "contraction constant and truncation bounds");
  bound->add_option("config", bound_args.config, "config file or packaged problem name")
      ->required();
  bound->add_option("--L1", bound_args.L1, "Lipschitz constant (estimated when omitted)");
  bound->add_option("--radius", bound_args.radius, "function ball radius for the estimate");
  bound->add_option("--q-max", bound_args.q_max, "largest truncation index");
  bound->add_option("--out", bound_args.out, "write the report here instead of stdout");
  bound->add_option("--precision", bound_args.precision, "significant digits")
      ->check(CLI::Range(1, 17));

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "run a packaged example and check its results");
  std::string demo_help = "one of";
  for (const auto& n : rcas::demo_names()) demo_help += " " + n;
  demo->add_option("name", demo_name, demo_help)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve) return cmd_solve(solve_args);
    if (*table) return cmd_table(table_args);
    if (*bound) return cmd_bound(bound_args);
    if (*demo) return cmd_demo(demo_name);
  } catch (const rcas::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rcas::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rcas::MaxOrderExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return kExitConfig;
}
