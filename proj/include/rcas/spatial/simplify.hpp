#pragma once

// Light canonicalization (sx_simplify) and distributive expansion (sx_expand).
//
// simplify: constant folding, 0/1 identities, flattening, identical factors
// collected into powers, exp(a)*exp(b) merged, like terms in sums merged, children
// in canonical order. It never expands products over sums.
//
// expand: distributes products and positive integer powers over sums, producing a
// sum of monomials. Used by the separable carrier to keep coefficients compact.

#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "rcas/spatial/expr.hpp"

namespace rcas::spatial {

Expr sx_simplify(const Expr& e);

namespace detail {

inline Expr stamp(Expr::Node n) {
  n.canonical = true;
  return Expr::make(std::move(n));
}

inline Expr canonical_nary(Kind kind, std::vector<Expr> children) {
  Expr::Node n;
  n.kind = kind;
  n.children = std::move(children);
  return stamp(std::move(n));
}

inline Expr canonical_power(Expr base, Rational p) {
  Expr::Node n;
  n.kind = Kind::Power;
  n.exponent = p;
  n.children.push_back(std::move(base));
  return stamp(std::move(n));
}

inline Expr canonical_function(Kind kind, Expr arg) {
  Expr::Node n;
  n.kind = kind;
  n.children.push_back(std::move(arg));
  return stamp(std::move(n));
}

/// Splits a canonical term into numeric coefficient and the remaining monomial.
/// The monomial of a pure constant is Constant(1).
inline std::pair<double, Expr> split_coefficient(const Expr& term) {
  if (term.is_constant()) return {term.value(), Expr::constant(1.0)};
  if (term.kind() == Kind::Product && term.child(0).is_constant()) {
    auto kids = term.children();
    const double c = kids[0].value();
    if (kids.size() == 2) return {c, kids[1]};
    return {c, canonical_nary(Kind::Product, std::vector<Expr>(kids.begin() + 1, kids.end()))};
  }
  return {1.0, term};
}

/// Rebuilds c * monomial in canonical form (monomial already canonical).
inline Expr with_coefficient(double c, const Expr& monomial) {
  if (c == 0.0) return Expr::constant(0.0);
  if (monomial.is_constant(1.0)) return Expr::constant(c);
  if (c == 1.0) return monomial;
  std::vector<Expr> kids{Expr::constant(c)};
  if (monomial.kind() == Kind::Product) {
    kids.insert(kids.end(), monomial.children().begin(), monomial.children().end());
  } else {
    kids.push_back(monomial);
  }
  return canonical_nary(Kind::Product, std::move(kids));
}

inline Expr simplify_power(const Expr& base, Rational p);
inline Expr simplify_product(std::vector<Expr> factors);
inline Expr simplify_sum(std::vector<Expr> terms);

inline Expr simplify_function(Kind kind, const Expr& arg) {
  if (arg.is_constant()) {
    const double v = arg.value();
    switch (kind) {
      case Kind::Exp: return Expr::constant(std::exp(v));
      case Kind::Sin: return Expr::constant(std::sin(v));
      case Kind::Cos: return Expr::constant(std::cos(v));
      case Kind::Sinh: return Expr::constant(std::sinh(v));
      case Kind::Cosh: return Expr::constant(std::cosh(v));
      default: break;
    }
  }
  return canonical_function(kind, arg);
}

inline Expr simplify_power(const Expr& base, Rational p) {
  if (p.num() == 0) return Expr::constant(1.0);
  if (p == Rational(1)) return base;
  switch (base.kind()) {
    case Kind::Constant: {
      const double b = base.value();
      if (p.is_integer()) {
        if (b == 0.0 && p.num() < 0) break;  // left symbolic; evaluation reports it
        return Expr::constant(std::pow(b, static_cast<double>(p.num())));
      }
      if (b > 0.0) return Expr::constant(std::pow(b, p.value()));
      if (b == 0.0 && p.num() > 0) return Expr::constant(0.0);
      break;
    }
    case Kind::Power:
      if (p.is_integer()) return simplify_power(base.child(), base.exponent() * p);
      break;
    case Kind::Product:
      if (p.is_integer()) {
        std::vector<Expr> kids;
        for (const auto& f : base.children()) kids.push_back(simplify_power(f, p));
        return simplify_product(std::move(kids));
      }
      break;
    case Kind::Exp:
      return simplify_function(
          Kind::Exp, simplify_product({Expr::constant(p.value()), base.child()}));
    default: break;
  }
  return canonical_power(base, p);
}

struct FactorLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

inline Expr simplify_product(std::vector<Expr> factors) {
  double coeff = 1.0;
  std::vector<Expr> exp_args;
  std::map<Expr, Rational, FactorLess> bases;
  std::vector<Expr> pending = std::move(factors);
  while (!pending.empty()) {
    Expr f = std::move(pending.back());
    pending.pop_back();
    switch (f.kind()) {
      case Kind::Constant: coeff *= f.value(); break;
      case Kind::Product:
        pending.insert(pending.end(), f.children().begin(), f.children().end());
        break;
      case Kind::Exp: exp_args.push_back(f.child()); break;
      case Kind::Power: {
        auto [it, inserted] = bases.try_emplace(f.child(), f.exponent());
        if (!inserted) it->second = it->second + f.exponent();
        break;
      }
      default: {
        auto [it, inserted] = bases.try_emplace(f, Rational(1));
        if (!inserted) it->second = it->second + Rational(1);
        break;
      }
    }
  }
  if (coeff == 0.0) return Expr::constant(0.0);
  std::vector<Expr> kids;
  for (const auto& [base, p] : bases) {
    if (p.num() == 0) continue;
    Expr powered = simplify_power(base, p);
    if (powered.is_constant()) {
      coeff *= powered.value();
    } else if (powered.kind() == Kind::Product) {
      // Only happens when a collected power distributes; one more pass keeps it flat.
      std::vector<Expr> again{Expr::constant(coeff)};
      again.insert(again.end(), kids.begin(), kids.end());
      again.push_back(powered);
      for (auto it = bases.upper_bound(base); it != bases.end(); ++it) {
        again.push_back(simplify_power(it->first, it->second));
      }
      for (const auto& a : exp_args) again.push_back(simplify_function(Kind::Exp, a));
      return simplify_product(std::move(again));
    } else if (powered.kind() == Kind::Exp) {
      exp_args.push_back(powered.child());
    } else {
      kids.push_back(std::move(powered));
    }
  }
  if (!exp_args.empty()) {
    Expr arg = exp_args.size() == 1 ? exp_args.front() : simplify_sum(std::move(exp_args));
    if (arg.is_constant()) {
      coeff *= std::exp(arg.value());
    } else {
      kids.push_back(canonical_function(Kind::Exp, std::move(arg)));
    }
  }
  if (coeff == 0.0) return Expr::constant(0.0);
  std::sort(kids.begin(), kids.end(), FactorLess{});
  if (kids.empty()) return Expr::constant(coeff);
  if (coeff != 1.0) kids.insert(kids.begin(), Expr::constant(coeff));
  if (kids.size() == 1) return kids.front();
  return canonical_nary(Kind::Product, std::move(kids));
}

inline Expr simplify_sum(std::vector<Expr> terms) {
  struct Acc {
    double sum = 0.0;
    double abs_sum = 0.0;
    int count = 0;
  };
  std::map<Expr, Acc, ExprLess> groups;
  std::vector<Expr> pending = std::move(terms);
  while (!pending.empty()) {
    Expr t = std::move(pending.back());
    pending.pop_back();
    if (t.kind() == Kind::Sum) {
      pending.insert(pending.end(), t.children().begin(), t.children().end());
      continue;
    }
    auto [c, mono] = split_coefficient(t);
    if (c == 0.0) continue;
    Acc& acc = groups[mono];
    acc.sum += c;
    acc.abs_sum += std::abs(c);
    acc.count += 1;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<Expr> kids;
  Expr constant_term;
  bool has_constant = false;
  for (const auto& [mono, acc] : groups) {
    // Cancellation down to summation roundoff is an exact zero.
    if (acc.sum == 0.0 || (acc.count > 1 && std::abs(acc.sum) <= 8.0 * eps * acc.abs_sum)) {
      continue;
    }
    if (mono.is_constant(1.0)) {
      constant_term = Expr::constant(acc.sum);
      has_constant = true;
      continue;
    }
    kids.push_back(with_coefficient(acc.sum, mono));
  }
  if (has_constant) kids.insert(kids.begin(), constant_term);
  if (kids.empty()) return Expr::constant(0.0);
  if (kids.size() == 1) return kids.front();
  return canonical_nary(Kind::Sum, std::move(kids));
}

}  // namespace detail

/// Canonical light simplification. Idempotent: simplify(simplify(e)) == simplify(e).
inline Expr sx_simplify(const Expr& e) {
  if (e.is_canonical()) return e;
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Var:
    case Kind::Jet: {
      Expr::Node n;
      n.kind = e.kind();
      n.value = e.value();
      n.index = e.index();
      n.jet = e.jet_index();
      return detail::stamp(std::move(n));
    }
    case Kind::Power: return detail::simplify_power(sx_simplify(e.child()), e.exponent());
    case Kind::Sum:
    case Kind::Product: {
      std::vector<Expr> kids;
      kids.reserve(e.children().size());
      for (const auto& c : e.children()) kids.push_back(sx_simplify(c));
      return e.kind() == Kind::Sum ? detail::simplify_sum(std::move(kids))
                                   : detail::simplify_product(std::move(kids));
    }
    default: return detail::simplify_function(e.kind(), sx_simplify(e.child()));
  }
}

// Arithmetic helpers returning canonical results.
inline Expr operator+(const Expr& a, const Expr& b) {
  return detail::simplify_sum({sx_simplify(a), sx_simplify(b)});
}
inline Expr operator*(const Expr& a, const Expr& b) {
  return detail::simplify_product({sx_simplify(a), sx_simplify(b)});
}
inline Expr operator-(const Expr& a) { return Expr::constant(-1.0) * a; }
inline Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
inline Expr operator*(double c, const Expr& a) { return Expr::constant(c) * a; }
inline Expr pow(const Expr& base, Rational p) {
  return detail::simplify_power(sx_simplify(base), p);
}

namespace detail {

/// Running coefficient of a monomial with the magnitude of what was summed into it,
/// so that cancellation down to roundoff is recognised as an exact zero.
struct Coefficient {
  double sum = 0.0;
  double abs = 0.0;

  void add(double c) { add(c, std::abs(c)); }
  void add(double c, double magnitude) {
    sum += c;
    abs += magnitude;
  }
  bool negligible() const {
    return sum == 0.0 || std::abs(sum) <= 8.0 * std::numeric_limits<double>::epsilon() * abs;
  }
};

/// Sum of monomials: canonical monomial -> coefficient.
using Polynomial = std::map<Expr, Coefficient, ExprLess>;

inline constexpr std::size_t kMaxExpansionTerms = 20000;

inline void add_term(Polynomial& poly, const Expr& term, double scale = 1.0) {
  auto [c, mono] = split_coefficient(term);
  if (c == 0.0) return;
  poly[mono].add(c * scale);
}

inline Polynomial to_polynomial(const Expr& expanded) {
  Polynomial out;
  if (expanded.kind() == Kind::Sum) {
    for (const auto& t : expanded.children()) add_term(out, t);
  } else {
    add_term(out, expanded);
  }
  return out;
}

inline Expr from_polynomial(const Polynomial& poly) {
  std::vector<Expr> terms;
  terms.reserve(poly.size());
  for (const auto& [mono, c] : poly) {
    if (!c.negligible()) terms.push_back(with_coefficient(c.sum, mono));
  }
  return simplify_sum(std::move(terms));
}

inline bool multiply_into(Polynomial& out, const Polynomial& a, const Polynomial& b) {
  if (a.size() * b.size() > kMaxExpansionTerms) return false;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      if (ca.sum == 0.0 || cb.sum == 0.0) continue;
      Expr m = ma.is_constant(1.0) ? mb
               : mb.is_constant(1.0) ? ma
                                     : simplify_product({ma, mb});
      auto [k, mono] = split_coefficient(m);
      out[mono].add(k * ca.sum * cb.sum, std::abs(k) * ca.abs * cb.abs);
    }
  }
  return true;
}

}  // namespace detail

/// Distributive expansion into a canonical sum of monomials. Fractional and negative
/// powers of sums stay atomic. Falls back to the simplified form if the expansion
/// would exceed an internal size limit.
inline Expr sx_expand(const Expr& input) {
  Expr e = sx_simplify(input);
  if (e.is_expanded()) return e;
  Expr out;
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Var:
    case Kind::Jet: out = e; break;
    case Kind::Sum: {
      detail::Polynomial poly;
      for (const auto& t : e.children()) {
        for (const auto& [m, c] : detail::to_polynomial(sx_expand(t))) poly[m].add(c.sum, c.abs);
      }
      out = detail::from_polynomial(poly);
      break;
    }
    case Kind::Product: {
      detail::Polynomial acc{{Expr::constant(1.0), detail::Coefficient{1.0, 1.0}}};
      bool ok = true;
      for (const auto& f : e.children()) {
        detail::Polynomial next;
        if (!detail::multiply_into(next, acc, detail::to_polynomial(sx_expand(f)))) {
          ok = false;
          break;
        }
        acc = std::move(next);
      }
      out = ok ? detail::from_polynomial(acc) : e;
      break;
    }
    case Kind::Power: {
      Expr base = sx_expand(e.child());
      const Rational p = e.exponent();
      if (base.kind() == Kind::Sum && p.is_integer() && p.num() > 1 && p.num() <= 16) {
        const detail::Polynomial b = detail::to_polynomial(base);
        detail::Polynomial acc = b;
        bool ok = true;
        for (std::int64_t i = 1; i < p.num() && ok; ++i) {
          detail::Polynomial next;
          ok = detail::multiply_into(next, acc, b);
          acc = std::move(next);
        }
        out = ok ? detail::from_polynomial(acc) : pow(base, p);
      } else {
        out = pow(base, p);
      }
      break;
    }
    default: out = detail::simplify_function(e.kind(), sx_expand(e.child())); break;
  }
  out.mark_expanded();
  return out;
}

}  // namespace rcas::spatial
