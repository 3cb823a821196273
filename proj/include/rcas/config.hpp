#pragma once

// Problem configuration documents.
//
//   # comment
//   [constants]        name = expression of earlier constants
//   [problem]          order, roots, base_time, dim, variables, horizon, n_max
//   [expressions]      nonlinearity, source, initial_u, initial_ut, exact
//   [domain]           <variable> = lo, hi
//   [tolerances]       zero, prune, term_budget, max_jet_order
//
// Roots accept real expressions and complex literals such as 1+2i, -i or b^(1/2)*i.
// Expressions in source and exact may use the time variable t; only the
// nonlinearity may use jet symbols (u, u_x, u_xy, ...) and D(f, x, ...).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcas/adomian.hpp"
#include "rcas/solver.hpp"
#include "rcas/spatial/parse.hpp"
#include "rcas/spatial/print.hpp"
#include "rcas/time_expr.hpp"

namespace rcas {

/// One `key = value` entry with its source position, kept for error messages.
struct ConfigValue {
  std::string text;
  int line = 0;
  int column = 0;  // column of the first value character

  friend bool operator==(const ConfigValue& a, const ConfigValue& b) { return a.text == b.text; }
};

struct ProblemConfig {
  std::vector<std::pair<std::string, ConfigValue>> constants;  // declaration order
  int order = 2;
  std::vector<ConfigValue> roots;
  ConfigValue base_time{"0"};
  int dim = 1;
  std::vector<std::string> variables{"x"};
  ConfigValue horizon{"1"};
  int n_max = kDefaultNMax;
  ConfigValue nonlinearity{"0"};
  ConfigValue source{"0"};
  ConfigValue initial_u{"0"};
  std::optional<ConfigValue> initial_ut;
  std::optional<ConfigValue> exact;
  std::vector<std::pair<ConfigValue, ConfigValue>> domain;  // per variable
  Tolerances tolerances;
  int max_jet_order = kDefaultMaxJetOrder;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;

  std::string to_text() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Splits at commas outside parentheses, keeping column offsets.
inline std::vector<ConfigValue> split_top_level(const ConfigValue& v) {
  std::vector<ConfigValue> out;
  int depth = 0;
  std::size_t start = 0;
  auto push = [&](std::size_t end) {
    std::string_view piece(v.text.data() + start, end - start);
    std::size_t lead = 0;
    while (lead < piece.size() && std::isspace(static_cast<unsigned char>(piece[lead]))) ++lead;
    out.push_back({trim(piece), v.line, v.column + static_cast<int>(start + lead)});
  };
  for (std::size_t i = 0; i < v.text.size(); ++i) {
    const char c = v.text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      push(i);
      start = i + 1;
    }
  }
  push(v.text.size());
  return out;
}

[[noreturn]] inline void config_fail(const std::string& msg, int line, int column = 1,
                                     std::vector<std::string> expected = {}) {
  throw ParseError(msg, line, column, std::move(expected));
}

inline int parse_int(const ConfigValue& v, const char* what) {
  int out = 0;
  const std::string t = trim(v.text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    config_fail(std::string(what) + " must be an integer, got '" + t + "'", v.line, v.column,
                {"integer"});
  }
  return out;
}

inline double parse_real_literal(const ConfigValue& v, const char* what) {
  double out = 0.0;
  const std::string t = trim(v.text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    config_fail(std::string(what) + " must be a number, got '" + t + "'", v.line, v.column,
                {"number"});
  }
  return out;
}

}  // namespace detail

/// Parses a configuration document. Throws ParseError with the document position.
inline ProblemConfig parse_config(std::string_view text) {
  using detail::config_fail;
  using detail::trim;
  ProblemConfig cfg;
  static const std::map<std::string, std::vector<std::string>> known{
      {"constants", {}},
      {"problem", {"order", "roots", "base_time", "dim", "variables", "horizon", "n_max"}},
      {"expressions", {"nonlinearity", "source", "initial_u", "initial_ut", "exact"}},
      {"domain", {}},
      {"tolerances", {"zero", "prune", "term_budget", "max_jet_order"}}};
  std::string section;
  std::map<std::string, ConfigValue> entries;  // "section.key"
  std::vector<std::pair<std::string, ConfigValue>> domain_entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') config_fail("unterminated section header", line_no, 1, {"']'"});
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (!known.count(section)) {
        std::vector<std::string> names;
        for (const auto& [k, v] : known) names.push_back("[" + k + "]");
        config_fail("unknown section [" + section + "]", line_no, 1, names);
      }
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos || eq >= line.size()) {
      config_fail("expected 'key = value'", line_no, 1, {"'='"});
    }
    if (section.empty()) config_fail("entry outside any section", line_no, 1, {"[section]"});
    const std::string key = trim(std::string_view(raw).substr(0, eq));
    std::string_view value_view = line.substr(eq + 1);
    std::size_t lead = 0;
    while (lead < value_view.size() && std::isspace(static_cast<unsigned char>(value_view[lead]))) {
      ++lead;
    }
    ConfigValue value{trim(value_view), line_no, static_cast<int>(eq + 2 + lead)};
    if (key.empty()) config_fail("empty key", line_no, 1, {"identifier"});
    if (section == "constants") {
      for (const auto& [name, v] : cfg.constants) {
        if (name == key) config_fail("constant '" + key + "' defined twice", line_no);
      }
      cfg.constants.emplace_back(key, value);
      continue;
    }
    if (section == "domain") {
      domain_entries.emplace_back(key, value);
      continue;
    }
    const auto& keys = known.at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      config_fail("unknown key '" + key + "' in [" + section + "]", line_no, 1, keys);
    }
    const std::string full = section + "." + key;
    if (entries.count(full)) config_fail("key '" + key + "' given twice", line_no);
    entries.emplace(full, value);
  }

  auto get = [&](const std::string& k) -> const ConfigValue* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };
  if (auto v = get("problem.order")) cfg.order = detail::parse_int(*v, "order");
  if (cfg.order != 1 && cfg.order != 2) {
    config_fail("order must be 1 or 2", get("problem.order") ? get("problem.order")->line : 1);
  }
  if (auto v = get("problem.roots")) {
    cfg.roots = detail::split_top_level(*v);
  } else {
    config_fail("[problem] needs 'roots'", line_no);
  }
  if (static_cast<int>(cfg.roots.size()) != cfg.order) {
    const auto* v = get("problem.roots");
    config_fail("order " + std::to_string(cfg.order) + " needs " + std::to_string(cfg.order) +
                    " root(s), got " + std::to_string(cfg.roots.size()),
                v->line, v->column);
  }
  if (auto v = get("problem.base_time")) cfg.base_time = *v;
  if (auto v = get("problem.horizon")) cfg.horizon = *v;
  if (auto v = get("problem.dim")) cfg.dim = detail::parse_int(*v, "dim");
  if (cfg.dim < 1 || cfg.dim > 3) config_fail("dim must be 1, 2 or 3", get("problem.dim")->line);
  if (auto v = get("problem.variables")) {
    cfg.variables.clear();
    for (const auto& piece : detail::split_top_level(*v)) cfg.variables.push_back(piece.text);
  } else {
    static const std::vector<std::string> defaults{"x", "y", "z"};
    cfg.variables.assign(defaults.begin(), defaults.begin() + cfg.dim);
  }
  if (static_cast<int>(cfg.variables.size()) != cfg.dim) {
    config_fail("variables must list exactly dim names", get("problem.variables")->line);
  }
  for (const auto& name : cfg.variables) {
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') ||
        name == "t" || name == "u" || name == "i") {
      config_fail("invalid variable name '" + name + "'", get("problem.variables")->line);
    }
  }
  if (auto v = get("problem.n_max")) cfg.n_max = detail::parse_int(*v, "n_max");
  if (cfg.n_max < 0) config_fail("n_max must be non-negative", get("problem.n_max")->line);
  if (auto v = get("expressions.nonlinearity")) cfg.nonlinearity = *v;
  if (auto v = get("expressions.source")) cfg.source = *v;
  if (auto v = get("expressions.initial_u")) {
    cfg.initial_u = *v;
  } else {
    config_fail("[expressions] needs 'initial_u'", line_no);
  }
  if (auto v = get("expressions.initial_ut")) cfg.initial_ut = *v;
  if (cfg.order == 2 && !cfg.initial_ut) {
    config_fail("second order problems need 'initial_ut'", line_no);
  }
  if (cfg.order == 1 && cfg.initial_ut) {
    config_fail("first order problems take no 'initial_ut'", get("expressions.initial_ut")->line);
  }
  if (auto v = get("expressions.exact")) cfg.exact = *v;

  for (const auto& name : cfg.variables) {
    auto it = std::find_if(domain_entries.begin(), domain_entries.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == domain_entries.end()) config_fail("[domain] has no interval for '" + name + "'", line_no);
    auto parts = detail::split_top_level(it->second);
    if (parts.size() != 2) {
      config_fail("domain interval must be 'lo, hi'", it->second.line, it->second.column,
                  {"lo, hi"});
    }
    cfg.domain.emplace_back(parts[0], parts[1]);
  }
  for (const auto& [name, v] : domain_entries) {
    if (std::find(cfg.variables.begin(), cfg.variables.end(), name) == cfg.variables.end()) {
      config_fail("[domain] names unknown variable '" + name + "'", v.line, 1, cfg.variables);
    }
  }
  if (auto v = get("tolerances.zero")) cfg.tolerances.zero = detail::parse_real_literal(*v, "zero");
  if (auto v = get("tolerances.prune")) cfg.tolerances.prune = detail::parse_real_literal(*v, "prune");
  if (auto v = get("tolerances.term_budget")) {
    const int b = detail::parse_int(*v, "term_budget");
    if (b < 1) config_fail("term_budget must be positive", v->line, v->column);
    cfg.tolerances.term_budget = static_cast<std::size_t>(b);
  }
  if (auto v = get("tolerances.max_jet_order")) {
    cfg.max_jet_order = detail::parse_int(*v, "max_jet_order");
  }
  if (!(cfg.tolerances.zero > 0.0) || !(cfg.tolerances.prune >= 0.0)) {
    config_fail("tolerances must be positive", line_no);
  }
  return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string ProblemConfig::to_text() const {
  std::ostringstream out;
  if (!constants.empty()) {
    out << "[constants]\n";
    for (const auto& [name, v] : constants) out << name << " = " << v.text << "\n";
    out << "\n";
  }
  out << "[problem]\n";
  out << "order = " << order << "\n";
  out << "roots = ";
  for (std::size_t i = 0; i < roots.size(); ++i) out << (i ? ", " : "") << roots[i].text;
  out << "\n";
  out << "base_time = " << base_time.text << "\n";
  out << "dim = " << dim << "\n";
  out << "variables = ";
  for (std::size_t i = 0; i < variables.size(); ++i) out << (i ? ", " : "") << variables[i];
  out << "\n";
  out << "horizon = " << horizon.text << "\n";
  out << "n_max = " << n_max << "\n\n";
  out << "[expressions]\n";
  out << "nonlinearity = " << nonlinearity.text << "\n";
  out << "source = " << source.text << "\n";
  out << "initial_u = " << initial_u.text << "\n";
  if (initial_ut) out << "initial_ut = " << initial_ut->text << "\n";
  if (exact) out << "exact = " << exact->text << "\n";
  out << "\n[domain]\n";
  for (std::size_t i = 0; i < domain.size(); ++i) {
    out << variables[i] << " = " << domain[i].first.text << ", " << domain[i].second.text << "\n";
  }
  out << "\n[tolerances]\n";
  out << "zero = " << spatial::format_number(tolerances.zero) << "\n";
  out << "prune = " << spatial::format_number(tolerances.prune) << "\n";
  out << "term_budget = " << tolerances.term_budget << "\n";
  out << "max_jet_order = " << max_jet_order << "\n";
  return out.str();
}

namespace detail {

/// Parses `v` with `ctx`, rethrowing parse errors at document coordinates.
inline Expr parse_value(const ConfigValue& v, const spatial::ParseContext& ctx) {
  try {
    return spatial::sx_parse(v.text, ctx);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), v.line, v.column + e.column() - 1, e.expected());
  }
}

inline double parse_constant_value(const ConfigValue& v, const spatial::ParseContext& ctx,
                                   const std::string& what) {
  Expr e = parse_value(v, ctx);
  if (!e.is_constant()) {
    throw ParseError(what + " must be a constant expression", v.line, v.column, {"number"});
  }
  return e.value();
}

/// Complex root from text such as "1+2i", "-i" or "b^(1/2)".
inline Complex parse_root(const ConfigValue& v, const std::map<std::string, double>& constants) {
  spatial::ParseContext ctx;
  ctx.variables = {"i"};
  ctx.constants = constants;
  ctx.imaginary_suffix = true;
  Expr e = spatial::sx_expand(parse_value(v, ctx));
  Complex out = 0.0;
  for (const auto& [mono, c] : spatial::detail::to_polynomial(e)) {
    int power = -1;
    if (mono.is_constant(1.0)) power = 0;
    else if (mono.kind() == spatial::Kind::Var) power = 1;
    else if (mono.kind() == spatial::Kind::Power && mono.child().kind() == spatial::Kind::Var &&
             mono.exponent().is_integer() && mono.exponent().num() > 0) {
      power = static_cast<int>(mono.exponent().num());
    }
    if (power < 0) throw ParseError("root must be a complex number", v.line, v.column, {"a + b i"});
    static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    out += c.sum * ipow[power % 4];
  }
  return out;
}

}  // namespace detail

/// A configuration resolved into a solvable problem.
struct BuiltProblem {
  ProblemSpec spec;
  int n_max = kDefaultNMax;
  std::vector<std::string> variables;
  std::map<std::string, double> constants;
  std::optional<Expr> exact_expr;

  spatial::PrintOptions print_options() const {
    spatial::PrintOptions opt;
    opt.variables = variables;
    opt.variables.push_back("t");
    return opt;
  }
};

inline BuiltProblem build_problem(const ProblemConfig& cfg) {
  BuiltProblem out;
  out.variables = cfg.variables;
  out.n_max = cfg.n_max;
  spatial::ParseContext consts;
  consts.variables.clear();
  for (const auto& [name, v] : cfg.constants) {
    if (std::find(cfg.variables.begin(), cfg.variables.end(), name) != cfg.variables.end() ||
        name == "t") {
      throw ParseError("constant '" + name + "' shadows a variable", v.line, 1);
    }
    const double value = detail::parse_constant_value(v, consts, "constant '" + name + "'");
    consts.constants[name] = value;
  }
  out.constants = consts.constants;

  ProblemSpec& p = out.spec;
  p.dim = cfg.dim;
  p.tolerances = cfg.tolerances;
  const double a = detail::parse_constant_value(cfg.base_time, consts, "base_time");
  p.horizon = detail::parse_constant_value(cfg.horizon, consts, "horizon");
  if (cfg.order == 1) {
    p.op = LinearOperatorSpec::first_order(detail::parse_root(cfg.roots[0], consts.constants), a);
  } else {
    p.op = LinearOperatorSpec::second_order(detail::parse_root(cfg.roots[0], consts.constants),
                                            detail::parse_root(cfg.roots[1], consts.constants), a);
  }

  spatial::ParseContext space = consts;
  space.variables = cfg.variables;
  spatial::ParseContext spacetime = space;
  spacetime.variables.push_back("t");
  spatial::ParseContext jets = space;
  jets.allow_jets = true;
  jets.jet_dim = cfg.dim;

  const std::size_t budget = cfg.tolerances.term_budget;
  p.nonlinearity = JetPolynomial::from_expr(detail::parse_value(cfg.nonlinearity, jets), cfg.dim,
                                            cfg.max_jet_order);
  p.source = to_separable(detail::parse_value(cfg.source, spacetime), cfg.dim, budget);
  p.init.a0 = detail::parse_value(cfg.initial_u, space);
  if (cfg.initial_ut) p.init.a1 = detail::parse_value(*cfg.initial_ut, space);
  if (cfg.exact) {
    out.exact_expr = detail::parse_value(*cfg.exact, spacetime);
    p.exact = to_separable(*out.exact_expr, cfg.dim, budget);
  }
  for (const auto& [lo, hi] : cfg.domain) {
    const double l = detail::parse_constant_value(lo, consts, "domain bound");
    const double h = detail::parse_constant_value(hi, consts, "domain bound");
    if (!(l < h)) throw ParseError("domain interval needs lo < hi", lo.line, lo.column);
    p.domain.push_back({l, h});
  }
  p.validate();
  return out;
}

}  // namespace rcas
