#pragma once

// Conversion between expressions in (X, t) and separable functions.
//
// to_separable accepts any expression whose time dependence is exp-polynomial:
// polynomials in t, and exp/sin/cos/sinh/cosh of (spatial part + c*t). The time
// variable is the variable with index `dim`.
//
// to_display turns a separable function back into a real expression in (X, t), folding
// conjugate exponential pairs into trigonometric and hyperbolic forms.

#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "rcas/separable.hpp"
#include "rcas/spatial/simplify.hpp"

namespace rcas {

namespace detail {

inline bool depends_on(const Expr& e, int var) {
  if (e.kind() == spatial::Kind::Var) return e.index() == var;
  for (const auto& c : e.children()) {
    if (depends_on(c, var)) return true;
  }
  return false;
}

/// Splits `arg` into A(X) + c*t. Throws when the t-dependence is not of that form.
inline std::pair<Expr, double> split_linear_in_t(const Expr& arg, int tvar) {
  using spatial::Kind;
  Expr expanded = spatial::sx_expand(arg);
  std::vector<Expr> spatial_terms;
  double c = 0.0;
  std::vector<Expr> terms;
  if (expanded.kind() == Kind::Sum) {
    terms.assign(expanded.children().begin(), expanded.children().end());
  } else {
    terms.push_back(expanded);
  }
  for (const auto& term : terms) {
    if (!depends_on(term, tvar)) {
      spatial_terms.push_back(term);
      continue;
    }
    auto [coef, mono] = spatial::detail::split_coefficient(term);
    if (mono.kind() == Kind::Var && mono.index() == tvar) {
      c += coef;
      continue;
    }
    throw ConfigError("time enters a function argument non-linearly; only A(x) + c*t is supported");
  }
  Expr a = spatial_terms.empty() ? Expr::constant(0.0)
                                 : spatial::detail::simplify_sum(std::move(spatial_terms));
  return {a, c};
}

inline SeparableFunction to_separable_rec(const Expr& e, int dim, std::size_t budget) {
  using spatial::Kind;
  const int tvar = dim;
  if (!depends_on(e, tvar)) return SeparableFunction::spatial(e, dim, budget);
  switch (e.kind()) {
    case Kind::Var:
      return SeparableFunction::product(Expr::constant(1.0),
                                        timealg::ExpPoly::monomial(1.0, 1, 0.0), dim, budget);
    case Kind::Sum: {
      std::vector<SeparableFunction> parts;
      for (const auto& c : e.children()) parts.push_back(to_separable_rec(c, dim, budget));
      return sf_sum(parts, dim, budget);
    }
    case Kind::Product: {
      SeparableFunction acc = SeparableFunction::spatial(Expr::constant(1.0), dim, budget);
      for (const auto& c : e.children()) acc = sf_mul(acc, to_separable_rec(c, dim, budget));
      return acc;
    }
    case Kind::Power: {
      const auto p = e.exponent();
      if (!p.is_integer() || p.num() < 0) {
        throw ConfigError("time appears under a negative or fractional power");
      }
      SeparableFunction base = to_separable_rec(e.child(), dim, budget);
      SeparableFunction acc = SeparableFunction::spatial(Expr::constant(1.0), dim, budget);
      for (std::int64_t i = 0; i < p.num(); ++i) acc = sf_mul(acc, base);
      return acc;
    }
    default: break;
  }
  auto [a, c] = split_linear_in_t(e.child(), tvar);
  using spatial::operator*;
  const Complex ic(0.0, c);
  auto two_exp = [&](Complex k1, Complex z1, Complex k2, Complex z2, const Expr& f) {
    timealg::ExpPoly g({{k1, 0, z1}, {k2, 0, z2}});
    return SeparableFunction::product(f, g, dim, budget);
  };
  switch (e.kind()) {
    case Kind::Exp:
      return SeparableFunction::product(spatial::sx_simplify(Expr::exp(a)),
                                        timealg::ExpPoly::exponential(c), dim, budget);
    case Kind::Sin: {
      // sin(A + ct) = sin A cos ct + cos A sin ct
      SeparableFunction s1 = two_exp(0.5, ic, 0.5, -ic, spatial::sx_simplify(Expr::sin(a)));
      SeparableFunction s2 = two_exp(Complex(0, -0.5), ic, Complex(0, 0.5), -ic,
                                     spatial::sx_simplify(Expr::cos(a)));
      return sf_add(s1, s2);
    }
    case Kind::Cos: {
      // cos(A + ct) = cos A cos ct - sin A sin ct
      SeparableFunction s1 = two_exp(0.5, ic, 0.5, -ic, spatial::sx_simplify(Expr::cos(a)));
      SeparableFunction s2 = two_exp(Complex(0, 0.5), ic, Complex(0, -0.5), -ic,
                                     spatial::sx_simplify(Expr::sin(a)));
      return sf_add(s1, s2);
    }
    case Kind::Sinh: {
      SeparableFunction s1 = two_exp(0.5, c, 0.5, -c, spatial::sx_simplify(Expr::sinh(a)));
      SeparableFunction s2 = two_exp(0.5, c, -0.5, -c, spatial::sx_simplify(Expr::cosh(a)));
      return sf_add(s1, s2);
    }
    case Kind::Cosh: {
      SeparableFunction s1 = two_exp(0.5, c, 0.5, -c, spatial::sx_simplify(Expr::cosh(a)));
      SeparableFunction s2 = two_exp(0.5, c, -0.5, -c, spatial::sx_simplify(Expr::sinh(a)));
      return sf_add(s1, s2);
    }
    default: break;
  }
  throw ConfigError("unsupported time dependence");
}

}  // namespace detail

/// Separable form of an expression in X and t, where t is variable index `dim`.
inline SeparableFunction to_separable(const Expr& e, int dim,
                                      std::size_t budget = kDefaultTermBudget) {
  return detail::to_separable_rec(spatial::sx_simplify(e), dim, budget);
}

namespace detail {

inline Expr scaled(double c, const Expr& e) {
  using spatial::operator*;
  return Expr::constant(c) * e;
}

inline Expr time_factor(int power, double rate, int tvar, spatial::Kind fn) {
  using spatial::operator*;
  Expr t = Expr::var(tvar);
  Expr out = Expr::constant(1.0);
  if (power > 0) out = spatial::pow(t, spatial::Rational(power));
  if (rate != 0.0) out = out * spatial::detail::simplify_function(fn, scaled(rate, t));
  else if (fn == spatial::Kind::Sin || fn == spatial::Kind::Sinh) return Expr::constant(0.0);
  return out;
}

}  // namespace detail

/// Real display expression in (X, t) for f. Conjugate pairs (lambda, conj lambda) with
/// conjugate coefficients render as e^{alpha t}(P cos(beta t) + Q sin(beta t)); real
/// pairs (mu, -mu) render as cosh/sinh; everything else as exp((lambda) t).
/// An unpaired complex key shows its real part.
inline Expr to_display(const SeparableFunction& f) {
  using spatial::Kind;
  using spatial::operator*;
  using spatial::operator+;
  using spatial::operator-;
  const int tvar = f.dim();
  std::vector<Expr> out;
  std::vector<bool> used(f.size(), false);
  auto terms = f.terms();
  auto partner = [&](std::size_t i, Complex target) -> std::size_t {
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (!used[j] && j != i && terms[j].key.power == terms[i].key.power &&
          timealg::same_exponent(terms[j].key.exponent, target)) {
        return j;
      }
    }
    return terms.size();
  };
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (used[i]) continue;
    const auto& ti = terms[i];
    const Complex lam = ti.key.exponent;
    const int k = ti.key.power;
    used[i] = true;
    Expr tk = k > 0 ? spatial::pow(Expr::var(tvar), spatial::Rational(k)) : Expr::constant(1.0);
    if (std::abs(lam.imag()) > timealg::kExponentMergeTol) {
      // c e^{lam t} + conj(c) e^{conj(lam) t} = 2 e^{at}(Re c cos bt - Im c sin bt)
      const std::size_t j = partner(i, std::conj(lam));
        double weight = 1.0;
        if (j < terms.size()) {
          used[j] = true;
          weight = 2.0;
        }
        // Render with the positive frequency so the output reads cos(t), sin(t).
        const bool flip = weight == 2.0 && lam.imag() < 0.0;
        const double a = lam.real();
        const double b = flip ? -lam.imag() : lam.imag();
        const ComplexExpr& c = flip ? terms[j].coeff : ti.coeff;
        Expr cos_part = detail::time_factor(0, b, tvar, Kind::Cos);
        Expr sin_part = detail::time_factor(0, b, tvar, Kind::Sin);
        Expr body = detail::scaled(weight, c.re) * cos_part - detail::scaled(weight, c.im) * sin_part;
        Expr growth = a != 0.0 ? spatial::detail::simplify_function(
                                     Kind::Exp, detail::scaled(a, Expr::var(tvar)))
                               : Expr::constant(1.0);
        out.push_back(spatial::sx_expand(tk * growth * body));
        continue;
    }
    if (lam.imag() == 0.0 && lam.real() != 0.0 && terms[i].coeff.is_real()) {
      const std::size_t j = partner(i, -lam);
      if (j < terms.size() && terms[j].coeff.is_real()) {
        // p e^{mu t} + q e^{-mu t} = (p + q) cosh(mu t) + (p - q) sinh(mu t)
        used[j] = true;
        const double mu = std::abs(lam.real());
        const Expr& p = lam.real() > 0 ? ti.coeff.re : terms[j].coeff.re;
        const Expr& q = lam.real() > 0 ? terms[j].coeff.re : ti.coeff.re;
        Expr ch = detail::time_factor(0, mu, tvar, Kind::Cosh);
        Expr sh = detail::time_factor(0, mu, tvar, Kind::Sinh);
        Expr body = spatial::sx_expand(p + q) * ch + spatial::sx_expand(p - q) * sh;
        out.push_back(tk * body);
        continue;
      }
    }
    Expr e = lam == Complex(0.0, 0.0)
                 ? Expr::constant(1.0)
                 : spatial::detail::simplify_function(Kind::Exp,
                                                      detail::scaled(lam.real(), Expr::var(tvar)));
    out.push_back(tk * e * ti.coeff.re);
  }
  if (out.empty()) return Expr::constant(0.0);
  return spatial::sx_simplify(Expr::sum(std::move(out)));
}

}  // namespace rcas
