#pragma once

// Recursive-descent parser for the expression grammar.
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := ('-' | '+') unary | power
//   power    := primary ('^' exponent)?
//   exponent := ('-' | '+')? power            (right associative, constant valued)
//   primary  := number | identifier | call | '(' expr ')'
//   call     := fname '(' expr ')' | 'D' '(' expr (',' variable)+ ')'
//
// Identifiers resolve, in order, to spatial variables, named constants and jet
// symbols (u, u_x, u_xy, ...). D(f, x, y) is the derivative of f in x then y; applied
// to jet symbols it is the total derivative.

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcas/spatial/calculus.hpp"

namespace rcas::spatial {

struct ParseContext {
  std::vector<std::string> variables{"x", "y", "z"};
  std::map<std::string, double> constants;
  bool allow_jets = false;
  std::string jet_symbol = "u";
  /// Number of spatial dimensions carried by jet indices; defaults to variables.size().
  int jet_dim = -1;
  /// Accept "2i"-style literals: a number directly followed by `i` multiplies the
  /// identifier `i`, which must then be a declared variable.
  bool imaginary_suffix = false;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx) : text_(text), ctx_(ctx) {}

  Expr parse_all() {
    skip_space();
    Expr e = parse_expr();
    skip_space();
    if (pos_ < text_.size()) {
      fail("unexpected '" + std::string(1, text_[pos_]) + "'", {"operator", "end of input"});
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) const {
    fail_at(pos_, msg, std::move(expected));
  }

  [[noreturn]] void fail_at(std::size_t at, const std::string& msg,
                            std::vector<std::string> expected = {}) const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col, std::move(expected));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail("unexpected end of input", {std::string("'") + c + "'"});
      fail("unexpected '" + std::string(1, text_[pos_]) + "'", {std::string("'") + c + "'"});
    }
  }

  Expr parse_expr() {
    std::vector<Expr> terms{parse_term()};
    for (;;) {
      if (accept('+')) {
        terms.push_back(parse_term());
      } else if (accept('-')) {
        terms.push_back(simplify_product({Expr::constant(-1.0), parse_term()}));
      } else {
        break;
      }
    }
    return terms.size() == 1 ? terms.front() : simplify_sum(std::move(terms));
  }

  Expr parse_term() {
    std::vector<Expr> factors{parse_unary()};
    for (;;) {
      if (accept('*')) {
        factors.push_back(parse_unary());
      } else if (accept('/')) {
        factors.push_back(simplify_power(parse_unary(), Rational(-1)));
      } else {
        break;
      }
    }
    return factors.size() == 1 ? factors.front() : simplify_product(std::move(factors));
  }

  Expr parse_unary() {
    if (accept('-')) return simplify_product({Expr::constant(-1.0), parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept('^')) return base;
    skip_space();
    const std::size_t at = pos_;
    Expr ex = parse_exponent();
    if (!ex.is_constant()) fail_at(at, "exponent must be a constant", {"number"});
    Rational p;
    try {
      p = to_rational(ex.value());
    } catch (const Error& err) {
      fail_at(at, err.what(), {"rational exponent"});
    }
    return simplify_power(base, p);
  }

  Expr parse_exponent() {
    if (accept('-')) return simplify_product({Expr::constant(-1.0), parse_exponent()});
    if (accept('+')) return parse_exponent();
    return parse_power();
  }

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::vector<std::string> primary_expected() const {
    return {"number", "identifier", "'('"};
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input", primary_expected());
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (ident_start(c)) return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'", primary_expected());
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
      if (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
        pos_ = q;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail_at(start, "malformed number", {"number"});
    Expr out = Expr::constant(v);
    if (ctx_.imaginary_suffix && pos_ < text_.size() && text_[pos_] == 'i' &&
        (pos_ + 1 >= text_.size() || !ident_char(text_[pos_ + 1]))) {
      ++pos_;
      out = simplify_product({out, resolve_identifier("i", pos_ - 1)});
    }
    return out;
  }

  std::optional<int> variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < ctx_.variables.size(); ++i) {
      if (ctx_.variables[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  int jet_dim() const {
    return ctx_.jet_dim >= 0 ? ctx_.jet_dim : static_cast<int>(ctx_.variables.size());
  }

  /// Decodes "u" or "u_<vars>" into a jet index, matching variable names greedily.
  std::optional<JetIndex> jet_index(std::string_view name) const {
    const std::string& sym = ctx_.jet_symbol;
    if (name.substr(0, sym.size()) != sym) return std::nullopt;
    std::string_view rest = name.substr(sym.size());
    JetIndex j(static_cast<std::size_t>(jet_dim()), 0);
    if (rest.empty()) return j;
    if (rest.front() != '_' || rest.size() == 1) return std::nullopt;
    rest.remove_prefix(1);
    while (!rest.empty()) {
      int best = -1;
      std::size_t best_len = 0;
      for (int i = 0; i < jet_dim() && i < static_cast<int>(ctx_.variables.size()); ++i) {
        const auto& v = ctx_.variables[static_cast<std::size_t>(i)];
        if (v.size() > best_len && rest.substr(0, v.size()) == v) {
          best = i;
          best_len = v.size();
        }
      }
      if (best < 0) return std::nullopt;
      j[static_cast<std::size_t>(best)] += 1;
      rest.remove_prefix(best_len);
    }
    return j;
  }

  Expr resolve_identifier(const std::string& name, std::size_t at) const {
    if (auto v = variable_index(name)) return Expr::var(*v);
    if (auto it = ctx_.constants.find(name); it != ctx_.constants.end()) {
      return Expr::constant(it->second);
    }
    if (auto j = jet_index(name)) {
      if (!ctx_.allow_jets) {
        fail_at(at, "jet symbol '" + name + "' is only allowed in the nonlinearity");
      }
      return Expr::jet(*j);
    }
    std::vector<std::string> expected;
    for (const auto& v : ctx_.variables) expected.push_back("'" + v + "'");
    expected.emplace_back("a defined constant");
    if (ctx_.allow_jets) expected.emplace_back("a jet symbol");
    fail_at(at, "unknown identifier '" + name + "'", std::move(expected));
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    static const std::map<std::string, Kind> functions{{"exp", Kind::Exp},
                                                       {"sin", Kind::Sin},
                                                       {"cos", Kind::Cos},
                                                       {"sinh", Kind::Sinh},
                                                       {"cosh", Kind::Cosh}};
    if (auto it = functions.find(name); it != functions.end()) {
      expect('(');
      Expr arg = parse_expr();
      expect(')');
      return simplify_function(it->second, arg);
    }
    if (name == "D") {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') return parse_derivative();
    }
    return resolve_identifier(name, start);
  }

  Expr parse_derivative() {
    expect('(');
    Expr f = parse_expr();
    bool any = false;
    while (accept(',')) {
      skip_space();
      const std::size_t at = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      const std::string var(text_.substr(at, pos_ - at));
      auto idx = variable_index(var);
      if (!idx) {
        std::vector<std::string> expected;
        for (const auto& v : ctx_.variables) expected.push_back("'" + v + "'");
        fail_at(at, var.empty() ? "missing differentiation variable"
                                : "'" + var + "' is not a variable",
                std::move(expected));
      }
      f = sx_diff(f, *idx);
      any = true;
    }
    if (!any) fail("D needs at least one differentiation variable", {"','"});
    expect(')');
    return f;
  }

  std::string_view text_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` to a simplified expression.
inline Expr sx_parse(std::string_view text, const ParseContext& ctx = {}) {
  return detail::Parser(text, ctx).parse_all();
}

}  // namespace rcas::spatial
