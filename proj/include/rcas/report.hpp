#pragma once

// Text and CSV rendering of solutions, error tables and convergence reports, the
// grid specification mini-language used by the command line, and the packaged
// demo problems with their expected-output checks.

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rcas/analysis.hpp"
#include "rcas/config.hpp"
#include "rcas/spatial/print.hpp"
#include "rcas/time_expr.hpp"

namespace rcas {

inline constexpr int kCsvDigits = 6;

/// Shortest %g-style rendering with the given number of significant digits.
inline std::string format_sig(double v, int digits = kCsvDigits) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

/// One axis of a grid: "lo:step:hi", a comma list "0.1,0.5,1" or a single value.
inline std::vector<double> parse_axis(std::string_view text) {
  auto number = [&](std::string_view s) {
    const std::string t = detail::trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError("bad grid value '" + t + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw ConfigError("range '" + std::string(text) + "' must be lo:step:hi");
    }
    const double lo = number(text.substr(0, c1));
    const double step = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double hi = number(text.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) {
      throw ConfigError("range '" + std::string(text) + "' needs step > 0 and lo <= hi");
    }
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("range '" + std::string(text) + "' is too long");
    for (long i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(number(text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// "x=-5:1:5;t=0.1,0.5,1" as a map from axis name to its values.
inline std::map<std::string, std::vector<double>> parse_grid(std::string_view text) {
  std::map<std::string, std::vector<double>> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto semi = text.find(';', start);
    if (semi == std::string_view::npos) semi = text.size();
    const std::string_view part = text.substr(start, semi - start);
    start = semi + 1;
    if (detail::trim(part).empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("grid axis '" + std::string(part) + "' must look like name=values");
    }
    const std::string name = detail::trim(part.substr(0, eq));
    if (out.count(name)) throw ConfigError("grid axis '" + name + "' given twice");
    out[name] = parse_axis(part.substr(eq + 1));
  }
  return out;
}

/// Cartesian product of the spatial axes in variable order; every variable and t required.
struct Grid {
  std::vector<std::vector<double>> points;
  std::vector<double> times;
};

inline Grid make_grid(const std::map<std::string, std::vector<double>>& axes,
                      const std::vector<std::string>& variables) {
  for (const auto& [name, values] : axes) {
    if (name != "t" && std::find(variables.begin(), variables.end(), name) == variables.end()) {
      throw ConfigError("grid axis '" + name + "' is not a problem variable");
    }
  }
  Grid g;
  auto t = axes.find("t");
  if (t == axes.end()) throw ConfigError("grid needs a t axis");
  g.times = t->second;
  g.points = {{}};
  for (const auto& v : variables) {
    auto it = axes.find(v);
    if (it == axes.end()) throw ConfigError("grid needs an axis for variable '" + v + "'");
    std::vector<std::vector<double>> next;
    for (const auto& p : g.points) {
      for (double x : it->second) {
        auto q = p;
        q.push_back(x);
        next.push_back(std::move(q));
      }
    }
    g.points = std::move(next);
  }
  return g;
}

inline void write_error_csv(std::ostream& out, const ErrorTable& table,
                            const std::vector<std::string>& variables, int digits = kCsvDigits) {
  for (const auto& v : variables) out << v << ',';
  out << "t,E_" << table.n << '\n';
  for (const auto& r : table.rows) {
    for (double x : r.point) out << format_sig(x, digits) << ',';
    out << format_sig(r.t, digits) << ',' << format_sig(r.error, digits) << '\n';
  }
}

/// Samples of S_n on the grid, with the exact solution and its error when known.
inline void write_solution_csv(std::ostream& out, const SeriesSolution& sol, int n,
                               const std::optional<SeparableFunction>& exact, const Grid& grid,
                               const std::vector<std::string>& variables,
                               int digits = kCsvDigits) {
  const SeparableFunction s = partial_sum(sol, n);
  for (const auto& v : variables) out << v << ',';
  out << "t,S_" << n;
  if (exact) out << ",exact,E_" << n;
  out << '\n';
  for (const auto& p : grid.points) {
    for (double t : grid.times) {
      for (double x : p) out << format_sig(x, digits) << ',';
      const double u = sf_eval(s, p, t);
      out << format_sig(t, digits) << ',' << format_sig(u, digits);
      if (exact) {
        const double e = sf_eval(*exact, p, t);
        out << ',' << format_sig(e, digits) << ',' << format_sig(std::abs(e - u), digits);
      }
      out << '\n';
    }
  }
}

inline std::string format_complex(Complex z) {
  if (z.imag() == 0.0) return spatial::format_number(z.real());
  std::string out = z.real() == 0.0 ? "" : spatial::format_number(z.real());
  const double im = z.imag();
  if (!out.empty()) out += im < 0.0 ? " - " : " + ";
  else if (im < 0.0) out += "-";
  out += spatial::format_number(std::abs(im)) + "i";
  return out;
}

inline std::string format_key(const TimeKey& k) {
  std::string out;
  if (k.power > 0) out += k.power == 1 ? "t" : "t^" + std::to_string(k.power);
  if (k.exponent != Complex(0.0, 0.0)) {
    if (!out.empty()) out += "*";
    out += "exp((" + format_complex(k.exponent) + ")*t)";
  }
  return out.empty() ? "1" : out;
}

inline void write_raw_terms(std::ostream& out, const SeparableFunction& f,
                            const spatial::PrintOptions& opt) {
  if (f.is_zero()) {
    out << "    (no keys)\n";
    return;
  }
  for (const auto& term : f.terms()) {
    out << "    [" << format_key(term.key) << "] re: " << spatial::sx_print(term.coeff.re, opt);
    if (!term.coeff.im.is_constant(0.0)) out << "  im: " << spatial::sx_print(term.coeff.im, opt);
    out << '\n';
  }
}

inline std::string describe_operator(const LinearOperatorSpec& op) {
  std::ostringstream s;
  s << "order " << op.order << ", roots " << format_complex(op.lambda1);
  if (op.order == 2) s << ", " << format_complex(op.lambda2);
  s << ", base time " << spatial::format_number(op.base_time);
  if (op.confluent()) s << " (confluent)";
  return s.str();
}

inline void write_solution_report(std::ostream& out, const BuiltProblem& bp,
                                  const SeriesSolution& sol, bool raw) {
  const spatial::PrintOptions opt = bp.print_options();
  out << "operator: " << describe_operator(bp.spec.op) << '\n';
  out << "nonlinearity: " << spatial::sx_print(bp.spec.nonlinearity.to_expr(), opt) << '\n';
  out << "horizon: " << spatial::format_number(bp.spec.horizon) << '\n';
  for (int n = 0; n <= sol.highest(); ++n) {
    const SeparableFunction& u = sol.corrections[static_cast<std::size_t>(n)];
    out << "u_" << n << " = " << spatial::sx_print(to_display(u), opt) << '\n';
    if (raw) write_raw_terms(out, u, opt);
  }
  out << "vanished_at: ";
  if (sol.vanished_at) out << *sol.vanished_at << '\n';
  else out << "none (checked up to n = " << sol.highest() << ")\n";
  out << "diagnostics:\n  n,keys,nodes,adomian_keys,pruned,seconds\n";
  for (const auto& d : sol.diagnostics) {
    out << "  " << d.index << ',' << d.keys << ',' << d.nodes << ',' << d.adomian_keys << ','
        << d.pruned << ',' << format_sig(d.seconds, 3) << '\n';
  }
}

inline void write_convergence_report(std::ostream& out, const ConvergenceReport& r, int q_max,
                                     int digits = kCsvDigits) {
  out << "kernel_mass: " << format_sig(r.kernel_mass, digits) << '\n';
  out << "L1: " << format_sig(r.L1, digits) << (r.L1_estimated ? " (estimated)" : "") << '\n';
  out << "alpha: " << format_sig(r.alpha, digits) << '\n';
  out << "M: " << format_sig(r.M, digits) << '\n';
  out << "contractive: " << (r.contractive ? "yes" : "no") << '\n';
  for (const auto& note : r.notes) out << "note: " << note << '\n';
  out << "q,bound\n";
  for (int q = 0; q <= q_max; ++q) {
    out << q << ',';
    if (r.contractive) out << format_sig(r.bound_per_q[static_cast<std::size_t>(q)], digits);
    else out << "n/a";
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Packaged demos

struct DemoCheck {
  std::string what;
  bool passed = false;
  std::string detail;  // observed versus expected
};

struct DemoResult {
  std::string name;
  BuiltProblem problem;
  SeriesSolution solution;
  std::vector<DemoCheck> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

inline const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names{"example1", "example2", "example3",
                                              "example4", "example5", "example6",
                                              "adm-example5"};
  return names;
}

namespace detail {

inline DemoCheck check_at_most(std::string what, double observed, double limit) {
  DemoCheck c{std::move(what), observed <= limit, {}};
  c.detail = "observed " + format_sig(observed, 6) + ", expected <= " + format_sig(limit, 3);
  return c;
}

inline DemoCheck check_relative(std::string what, double observed, double expected, double rel) {
  const double err = std::abs(observed - expected) / std::abs(expected);
  DemoCheck c{std::move(what), err <= rel, {}};
  c.detail = "observed " + format_sig(observed, 6) + ", expected " + format_sig(expected, 6) +
             " within " + format_sig(100.0 * rel, 3) + "%";
  return c;
}

inline SeparableFunction demo_function(const std::string& text) {
  spatial::ParseContext ctx;
  ctx.variables = {"x", "t"};
  return to_separable(spatial::sx_parse(text, ctx), 1);
}

}  // namespace detail

/// Solves a packaged problem and checks the properties it is known for.
inline DemoResult run_demo(const std::string& name, std::string_view config_text) {
  if (std::find(demo_names().begin(), demo_names().end(), name) == demo_names().end()) {
    throw ConfigError("unknown demo '" + name + "'");
  }
  DemoResult r;
  r.name = name;
  r.problem = build_problem(parse_config(config_text));
  r.solution = solve(r.problem.spec, r.problem.n_max);
  const ProblemSpec& p = r.problem.spec;
  const SeriesSolution& s = r.solution;
  const spatial::SamplePlan& plan = s.plan;
  auto correction_max = [&](int n) {
    return n <= s.highest() ? sf_max_abs(s.corrections[static_cast<std::size_t>(n)], plan) : 0.0;
  };

  if (name == "adm-example5") {
    const SeparableFunction u0 = detail::demo_function("t*x^2");
    const SeparableFunction u1 = detail::demo_function("-t^3/6*x^2");
    r.checks.push_back(detail::check_at_most(
        "u_0 = t x^2", sf_max_abs(sf_sub(s.corrections.at(0), u0), plan), 1e-10));
    r.checks.push_back(detail::check_at_most(
        "u_1 = -t^3/6 x^2", sf_max_abs(sf_sub(s.corrections.at(1), u1), plan), 1e-10));
    return r;
  }

  if (!p.exact) throw MissingExact("demo '" + name + "' has no exact solution");
  if (name == "example2") {
    std::vector<std::vector<double>> xs{{-5.0}, {5.0}};
    const ErrorTable t = error_table(s, *p.exact, xs, {0.1, 1.0}, 5);
    r.checks.push_back(detail::check_relative("E_5(-5, 1)", t.rows[1].error, 3.79589e-8, 0.01));
    r.checks.push_back(detail::check_relative("E_5(5, 1)", t.rows[3].error, 5.31348e-8, 0.01));
    r.checks.push_back(detail::check_at_most(
        "E_5 at t = 0.1", std::max(t.rows[0].error, t.rows[2].error), 1e-13));
    return r;
  }

  const double u0_tol = name == "example1" ? 1e-12 : 1e-10;
  const double corr_tol = name == "example1" ? 1e-10 : 1e-9;
  r.checks.push_back(detail::check_at_most(
      "u_0 equals the exact solution", sf_max_abs(sf_sub(s.corrections.at(0), *p.exact), plan),
      u0_tol));
  r.checks.push_back(detail::check_at_most("u_1 vanishes", correction_max(1), corr_tol));
  r.checks.push_back(detail::check_at_most("u_2 vanishes", correction_max(2), corr_tol));
  DemoCheck v{"corrections stop after u_0", s.vanished_at == 1, {}};
  v.detail = "vanished_at = " + (s.vanished_at ? std::to_string(*s.vanished_at) : "none") +
             ", expected 1";
  r.checks.push_back(v);
  return r;
}

}  // namespace rcas
