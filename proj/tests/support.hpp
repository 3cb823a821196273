#pragma once

// Seeded generators and small numeric oracles shared by the test suites.

#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rcas/spatial/calculus.hpp"
#include "rcas/spatial/parse.hpp"
#include "rcas/spatial/simplify.hpp"
#include "rcas/time_expr.hpp"

namespace rcas::testing {

using spatial::Kind;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return rng_; }

  Complex complex_in_disc(double radius) {
    const double r = radius * std::sqrt(uniform(0.0, 1.0));
    const double a = uniform(0.0, 2.0 * M_PI);
    return std::polar(r, a);
  }

  /// Random term c t^k e^{mu t} with |mu| <= radius and k <= max_power.
  timealg::ExpPolyTerm exp_poly_term(double radius, int max_power) {
    return {complex_in_disc(2.0), integer(0, max_power), complex_in_disc(radius)};
  }

  timealg::ExpPoly exp_poly(int terms, double radius, int max_power) {
    std::vector<timealg::ExpPolyTerm> t;
    for (int i = 0; i < terms; ++i) t.push_back(exp_poly_term(radius, max_power));
    return timealg::ExpPoly(std::move(t));
  }

  /// Random smooth expression in `dim` variables, built from everywhere-defined pieces.
  /// With `raw` the tree is assembled without any simplification.
  Expr expr(int dim, int depth, bool raw = false) {
    if (depth <= 0 || integer(0, 4) == 0) {
      if (coin()) return Expr::constant(std::round(uniform(-3.0, 3.0) * 4.0) / 4.0);
      return Expr::var(integer(0, dim - 1));
    }
    auto sub = [&] { return expr(dim, depth - 1, raw); };
    auto finish = [&](Expr e) { return raw ? e : spatial::sx_simplify(e); };
    switch (integer(0, 6)) {
      case 0: return finish(Expr::sum({sub(), sub()}));
      case 1: return finish(Expr::product({sub(), sub()}));
      case 2: return finish(Expr::power(sub(), spatial::Rational(integer(2, 3))));
      case 3: return finish(Expr::sin(sub()));
      case 4: return finish(Expr::cos(sub()));
      case 5: return finish(Expr::exp(Expr::product({Expr::constant(0.5), sub()})));
      default: return finish(Expr::sinh(Expr::product({Expr::constant(0.5), sub()})));
    }
  }

  /// Random separable function: a few spatial polynomials times random time keys.
  /// Exponents come in conjugate pairs so every value is real.
  SeparableFunction separable(int dim, int keys, double radius, int max_power) {
    using spatial::operator*;
    using spatial::operator+;
    TermAccumulator acc(dim, kDefaultTermBudget);
    for (int i = 0; i < keys; ++i) {
      std::vector<Expr> poly;
      for (int k = 0; k < 3; ++k) {
        Expr mono = Expr::constant(std::round(uniform(-2.0, 2.0) * 8.0) / 8.0);
        for (int d = 0; d < dim; ++d) {
          const int p = integer(0, 2);
          if (p > 0) mono = mono * spatial::pow(Expr::var(d), spatial::Rational(p));
        }
        poly.push_back(mono);
      }
      const ComplexExpr c{spatial::sx_simplify(Expr::sum(poly)), Expr::constant(0.0)};
      const int power = integer(0, max_power);
      if (coin()) {
        acc.add_scaled({power, {uniform(-radius, radius), 0.0}}, 1.0, c);
      } else {
        const Complex mu{uniform(-radius, radius), uniform(0.2, radius)};
        const Complex w = complex_in_disc(1.0);
        acc.add_scaled({power, mu}, w, c);
        acc.add_scaled({power, std::conj(mu)}, std::conj(w), c);
      }
    }
    return acc.finish();
  }

 private:
  std::mt19937_64 rng_;
};

/// Adaptive Gauss-Kronrod integral of a complex integrand over [a, b].
template <class F>
Complex quad_complex(F f, double a, double b, double tol = 1e-13) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (a == b) return 0.0;
  const double re = GK::integrate([&](double s) { return f(s).real(); }, a, b, 20, tol);
  const double im = GK::integrate([&](double s) { return f(s).imag(); }, a, b, 20, tol);
  return {re, im};
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline spatial::ParseContext space_time_context(std::vector<std::string> vars = {"x"}) {
  spatial::ParseContext ctx;
  ctx.variables = std::move(vars);
  ctx.variables.push_back("t");
  return ctx;
}

/// Parses an expression in the spatial variables plus t into a separable function.
inline SeparableFunction sep(const std::string& text, std::vector<std::string> vars = {"x"}) {
  const int dim = static_cast<int>(vars.size());
  return to_separable(spatial::sx_parse(text, space_time_context(std::move(vars))), dim);
}

inline Expr parse(const std::string& text, std::vector<std::string> vars = {"x"}) {
  spatial::ParseContext ctx;
  ctx.variables = std::move(vars);
  return spatial::sx_parse(text, ctx);
}

inline spatial::SamplePlan unit_plan(int dim = 1, double lo = 0.0, double hi = 1.0,
                                     double t_hi = 1.0) {
  spatial::Box box(static_cast<std::size_t>(dim), spatial::Interval{lo, hi});
  spatial::SamplePlan plan = spatial::make_plan(box);
  plan.times = spatial::chebyshev_nodes(0.0, t_hi, spatial::kTimeSamples);
  return plan;
}

/// One-dimensional unit plan whose time samples cover [a, a + length].
inline spatial::SamplePlan window_plan(double a, double length = 1.0) {
  spatial::SamplePlan plan = unit_plan();
  plan.times = spatial::chebyshev_nodes(a, a + length, spatial::kTimeSamples);
  return plan;
}

inline bool relative_close(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace rcas::testing
