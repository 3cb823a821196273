#pragma once

// Numeric evaluation and exact symbolic differentiation of spatial expressions.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rcas/spatial/simplify.hpp"

namespace rcas::spatial {

/// Value of `e` at `point`. Jet variables have no numeric value and are rejected.
inline double sx_eval(const Expr& e, std::span<const double> point) {
  switch (e.kind()) {
    case Kind::Constant: return e.value();
    case Kind::Var:
      if (e.index() < 0 || static_cast<std::size_t>(e.index()) >= point.size()) {
        throw Error("evaluation point has dimension " + std::to_string(point.size()) +
                    " but variable index " + std::to_string(e.index()) + " is referenced");
      }
      return point[static_cast<std::size_t>(e.index())];
    case Kind::Jet: throw Error("jet variable cannot be evaluated numerically");
    case Kind::Power: {
      const double b = sx_eval(e.child(), point);
      const Rational p = e.exponent();
      if (p.is_integer()) {
        if (b == 0.0 && p.num() < 0) {
          throw DomainEvaluationError("division by zero in negative integer power");
        }
        return std::pow(b, static_cast<double>(p.num()));
      }
      if (!(b > 0.0)) {
        throw DomainEvaluationError("fractional power of non-positive base " + std::to_string(b));
      }
      return std::pow(b, p.value());
    }
    case Kind::Exp: return std::exp(sx_eval(e.child(), point));
    case Kind::Sin: return std::sin(sx_eval(e.child(), point));
    case Kind::Cos: return std::cos(sx_eval(e.child(), point));
    case Kind::Sinh: return std::sinh(sx_eval(e.child(), point));
    case Kind::Cosh: return std::cosh(sx_eval(e.child(), point));
    case Kind::Product: {
      double v = 1.0;
      for (const auto& c : e.children()) v *= sx_eval(c, point);
      return v;
    }
    case Kind::Sum: {
      double v = 0.0;
      for (const auto& c : e.children()) v += sx_eval(c, point);
      return v;
    }
  }
  return 0.0;
}

inline double sx_eval(const Expr& e, std::initializer_list<double> point) {
  return sx_eval(e, std::span<const double>(point.begin(), point.size()));
}

namespace detail {

inline Expr diff_raw(const Expr& e, int var) {
  switch (e.kind()) {
    case Kind::Constant: return Expr::constant(0.0);
    case Kind::Var: return Expr::constant(e.index() == var ? 1.0 : 0.0);
    case Kind::Jet: {
      JetIndex j = e.jet_index();
      if (static_cast<std::size_t>(var) >= j.size()) j.resize(static_cast<std::size_t>(var) + 1, 0);
      j[static_cast<std::size_t>(var)] += 1;
      return Expr::jet(std::move(j));
    }
    case Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& c : e.children()) terms.push_back(diff_raw(c, var));
      return simplify_sum(std::move(terms));
    }
    case Kind::Product: {
      auto kids = e.children();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        Expr d = diff_raw(kids[i], var);
        if (d.is_zero()) continue;
        std::vector<Expr> factors(kids.begin(), kids.end());
        factors[i] = d;
        terms.push_back(simplify_product(std::move(factors)));
      }
      return simplify_sum(std::move(terms));
    }
    case Kind::Power: {
      Expr d = diff_raw(e.child(), var);
      if (d.is_zero()) return Expr::constant(0.0);
      const Rational p = e.exponent();
      return simplify_product({Expr::constant(p.value()),
                               simplify_power(e.child(), p - Rational(1)), d});
    }
    default: break;
  }
  const Expr& a = e.child();
  Expr d = diff_raw(a, var);
  if (d.is_zero()) return Expr::constant(0.0);
  Expr outer;
  switch (e.kind()) {
    case Kind::Exp: outer = e; break;
    case Kind::Sin: outer = simplify_function(Kind::Cos, a); break;
    case Kind::Cos:
      outer = simplify_product({Expr::constant(-1.0), simplify_function(Kind::Sin, a)});
      break;
    case Kind::Sinh: outer = simplify_function(Kind::Cosh, a); break;
    case Kind::Cosh: outer = simplify_function(Kind::Sinh, a); break;
    default: break;
  }
  return simplify_product({outer, d});
}

}  // namespace detail

/// Exact partial derivative with respect to variable `var`. On jet variables this is
/// the total derivative: u_x differentiated in x becomes u_xx.
inline Expr sx_diff(const Expr& e, int var) { return detail::diff_raw(sx_simplify(e), var); }

}  // namespace rcas::spatial
