#pragma once

// Printer producing text in the parser's grammar. parse(print(e)) == simplify(e).

#include <charconv>
#include <string>
#include <vector>

#include "rcas/spatial/simplify.hpp"

namespace rcas::spatial {

struct PrintOptions {
  std::vector<std::string> variables{"x", "y", "z"};
  std::string jet_symbol = "u";
};

/// Shortest text that reads back to exactly `v`.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

namespace detail {

inline std::string variable_name(int index, const PrintOptions& opt) {
  if (index >= 0 && static_cast<std::size_t>(index) < opt.variables.size()) {
    return opt.variables[static_cast<std::size_t>(index)];
  }
  return "x" + std::to_string(index);
}

// Binding strength of the printed form, used to decide parentheses.
enum Prec { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

inline std::string print_expr(const Expr& e, const PrintOptions& opt, Prec& prec);

inline std::string print_at(const Expr& e, const PrintOptions& opt, Prec needed) {
  Prec p = kAtom;
  std::string s = print_expr(e, opt, p);
  return p < needed ? "(" + s + ")" : s;
}

inline std::string exponent_text(Rational r) {
  if (r.is_integer() && r.num() > 0) return std::to_string(r.num());
  if (r.is_integer()) return "(" + std::to_string(r.num()) + ")";
  return "(" + std::to_string(r.num()) + "/" + std::to_string(r.den()) + ")";
}

/// Prints a product of factors, splitting negative powers into a denominator.
inline std::string print_factors(double coeff, const std::vector<Expr>& factors,
                                 const PrintOptions& opt, Prec& prec) {
  std::vector<std::string> num, den;
  for (const auto& f : factors) {
    if (f.kind() == Kind::Power && compare(f.exponent(), Rational(0)) < 0) {
      const Rational p = Rational(0) - f.exponent();
      if (p == Rational(1)) {
        den.push_back(print_at(f.child(), opt, kPower));
      } else {
        den.push_back(print_at(f.child(), opt, kAtom) + "^" + exponent_text(p));
      }
    } else {
      num.push_back(print_at(f, opt, kPower));
    }
  }
  std::string out;
  const bool negative = coeff < 0.0;
  const double mag = negative ? -coeff : coeff;
  if (mag != 1.0 || num.empty()) num.insert(num.begin(), format_number(mag));
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (i > 0) out += "*";
    out += num[i];
  }
  if (!den.empty()) {
    out += "/";
    std::string d;
    for (std::size_t i = 0; i < den.size(); ++i) {
      if (i > 0) d += "*";
      d += den[i];
    }
    out += den.size() > 1 ? "(" + d + ")" : d;
  }
  prec = kProduct;
  if (negative) {
    out = "-" + out;
    prec = kUnary;
  }
  if (factors.size() == 1 && den.empty() && mag == 1.0) prec = negative ? kUnary : kPower;
  return out;
}

inline std::string print_expr(const Expr& e, const PrintOptions& opt, Prec& prec) {
  prec = kAtom;
  switch (e.kind()) {
    case Kind::Constant: {
      std::string s = format_number(e.value());
      if (e.value() < 0.0) prec = kUnary;
      return s;
    }
    case Kind::Var: return variable_name(e.index(), opt);
    case Kind::Jet: {
      std::string s = opt.jet_symbol;
      const auto& j = e.jet_index();
      std::string suffix;
      for (std::size_t i = 0; i < j.size(); ++i) {
        for (int k = 0; k < j[i]; ++k) suffix += variable_name(static_cast<int>(i), opt);
      }
      return suffix.empty() ? s : s + "_" + suffix;
    }
    case Kind::Power: {
      prec = kPower;
      const std::string base = print_at(e.child(), opt, kAtom);
      return base + "^" + exponent_text(e.exponent());
    }
    case Kind::Product: {
      auto [c, mono] = split_coefficient(e);
      std::vector<Expr> factors;
      if (mono.kind() == Kind::Product) {
        factors.assign(mono.children().begin(), mono.children().end());
      } else {
        factors.push_back(mono);
      }
      return print_factors(c, factors, opt, prec);
    }
    case Kind::Sum: {
      // Positive terms lead so that "t - x" reads naturally; order is free because
      // parsing re-canonicalizes.
      std::vector<Expr> ordered;
      for (const auto& t : e.children()) {
        if (split_coefficient(t).first > 0.0) ordered.push_back(t);
      }
      for (const auto& t : e.children()) {
        if (split_coefficient(t).first < 0.0) ordered.push_back(t);
      }
      std::string out;
      bool first = true;
      for (const auto& t : ordered) {
        auto [c, mono] = split_coefficient(t);
        const bool neg = c < 0.0;
        Expr shown = neg ? with_coefficient(-c, mono) : t;
        std::string s = print_at(shown, opt, kProduct);
        if (first) {
          out = neg ? "-" + s : s;
        } else {
          out += neg ? " - " : " + ";
          out += s;
        }
        first = false;
      }
      prec = kSum;
      return out;
    }
    default: {
      Prec inner = kAtom;
      return std::string(function_name(e.kind())) + "(" + print_expr(e.child(), opt, inner) + ")";
    }
  }
}

}  // namespace detail

inline std::string sx_print(const Expr& e, const PrintOptions& opt = {}) {
  detail::Prec p = detail::kAtom;
  return detail::print_expr(sx_simplify(e), opt, p);
}

}  // namespace rcas::spatial
