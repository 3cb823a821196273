#pragma once

// The factored linear operator O = (d/dt - l2)(d/dt - l1) (or d/dt - l1 for first
// order problems), its exact inverse as iterated exponential-kernel integrals from
// the base time a, and the leading term carrying the initial data.

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>

#include "rcas/separable.hpp"
#include "rcas/timealg.hpp"

namespace rcas {

inline constexpr double kConfluentTol = 1e-9;

// Distinct roots closer than this are inverted through a power series in their
// separation. The series is summed until its tail is negligible for t - a up to
// kSeriesWindow; beyond that window the closed form two-exponential kernel would
// be needed again, but its coefficients of order 1/(l2 - l1) lose too many digits.
inline constexpr double kNearConfluentTol = 1e-4;
inline constexpr double kSeriesWindow = 64.0;

struct LinearOperatorSpec {
  int order = 2;
  Complex lambda1{0.0, 0.0};
  Complex lambda2{0.0, 0.0};
  double base_time = 0.0;

  static LinearOperatorSpec first_order(Complex lambda, double a = 0.0) {
    return {1, lambda, {0.0, 0.0}, a};
  }
  static LinearOperatorSpec second_order(Complex l1, Complex l2, double a = 0.0) {
    return {2, l1, l2, a};
  }
  /// Roots of r^2 + c1 r + c0 for the operator u_tt + c1 u_t + c0 u. The root with the
  /// larger real part (then imaginary part) becomes lambda1.
  static LinearOperatorSpec from_coefficients(double c1, double c0, double a = 0.0) {
    const Complex disc = std::sqrt(Complex(c1 * c1 - 4.0 * c0, 0.0));
    // Cancellation-free pair: one root by the quadratic formula, the other via Vieta.
    const Complex q = -0.5 * (Complex(c1, 0.0) + (c1 >= 0.0 ? disc : -disc));
    Complex r1 = q;
    Complex r2 = q == Complex(0.0, 0.0) ? Complex(0.0, 0.0) : Complex(c0, 0.0) / q;
    if (q == Complex(0.0, 0.0)) r2 = -Complex(c1, 0.0);
    if (r2.real() > r1.real() || (r2.real() == r1.real() && r2.imag() > r1.imag())) {
      std::swap(r1, r2);
    }
    return second_order(r1, r2, a);
  }

  void validate() const {
    if (order != 1 && order != 2) throw ConfigError("operator order must be 1 or 2");
    auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    if (!finite(lambda1) || !finite(lambda2) || !std::isfinite(base_time)) {
      throw ConfigError("operator roots and base time must be finite");
    }
  }

  bool confluent() const { return order == 2 && std::abs(lambda1 - lambda2) <= kConfluentTol; }

  friend bool operator==(const LinearOperatorSpec&, const LinearOperatorSpec&) = default;
};

struct InitialData {
  Expr a0;
  std::optional<Expr> a1;
};

/// O[f], applied in factored form.
inline SeparableFunction op_apply(const LinearOperatorSpec& spec, const SeparableFunction& f) {
  SeparableFunction g = sf_sub(sf_diff_t(f), sf_scale(f, spec.lambda1));
  if (spec.order == 1) return g;
  return sf_sub(sf_diff_t(g), sf_scale(g, spec.lambda2));
}

/// O^{-1} applied to the single time key t^k e^{mu t}, as an exp-polynomial.
inline timealg::ExpPoly op_inverse_kernel(const LinearOperatorSpec& spec, const TimeKey& key) {
  using timealg::ExpPoly;
  const double a = spec.base_time;
  const Complex mu = key.exponent;
  if (spec.order == 1) {
    ExpPoly inner = timealg::ep_integrate(ExpPoly::monomial(1.0, key.power, mu - spec.lambda1), a);
    return ExpPoly::exponential(spec.lambda1) * inner;
  }
  if (spec.confluent()) {
    const Complex lam = spec.lambda1;
    ExpPoly once = timealg::ep_integrate(ExpPoly::monomial(1.0, key.power, mu - lam), a);
    return ExpPoly::exponential(lam) * timealg::ep_integrate(once, a);
  }
  const Complex l1 = spec.lambda1;
  const Complex l2 = spec.lambda2;
  const Complex delta = l2 - l1;
  if (std::abs(delta) <= kNearConfluentTol) {
    // The kernel (e^{l2 r} - e^{l1 r}) / delta equals e^{l1 r} sum_j delta^j r^{j+1} / (j+1)!,
    // so the inverse is e^{l1 t} sum_j delta^j I^{j+2}[e^{-l1 s} f] with I integrating from a.
    ExpPoly level = timealg::ep_integrate(ExpPoly::monomial(1.0, key.power, mu - l1), a);
    ExpPoly sum;
    Complex weight = 1.0;
    double tail = 1.0;
    const double ratio = std::abs(delta) * kSeriesWindow;
    for (int j = 0;; ++j) {
      level = timealg::ep_integrate(level, a);
      sum = sum + level.scaled(weight);
      tail *= ratio / static_cast<double>(j + 2);
      if (tail <= 1e-17) break;
      weight *= delta;
    }
    return ExpPoly::exponential(l1) * sum;
  }
  ExpPoly inner = timealg::ep_integrate(ExpPoly::monomial(1.0, key.power, mu - l2), a);
  ExpPoly outer = timealg::ep_integrate(ExpPoly::exponential(l2 - l1) * inner, a);
  return ExpPoly::exponential(l1) * outer;
}

/// O^{-1}[f]: the solution of O[v] = f with v(a) = 0 (and v_t(a) = 0 for order 2).
inline SeparableFunction op_inverse_apply(const LinearOperatorSpec& spec,
                                          const SeparableFunction& f) {
  TermAccumulator acc(f.dim(), f.budget());
  for (const auto& term : f.terms()) {
    const timealg::ExpPoly h = op_inverse_kernel(spec, term.key);
    for (const auto& piece : h.terms()) acc.add_scaled(piece.key(), piece.coeff, term.coeff);
  }
  return acc.finish();
}

/// Solution of the homogeneous problem with the given initial data plus O^{-1}[S].
inline SeparableFunction op_leading_term(const LinearOperatorSpec& spec, const InitialData& init,
                                         const SeparableFunction& source) {
  const int dim = source.dim();
  const double a = spec.base_time;
  const ComplexExpr u0{spatial::sx_simplify(init.a0), Expr::constant(0.0)};
  TermAccumulator acc(dim, source.budget());
  const Complex l1 = spec.lambda1;
  const Complex e1 = std::exp(-l1 * a);
  if (spec.order == 1) {
    acc.add_scaled({0, l1}, e1, u0);
  } else {
    if (!init.a1) throw ConfigError("second order problems need initial_ut");
    const ComplexExpr u1{spatial::sx_simplify(*init.a1), Expr::constant(0.0)};
    if (spec.confluent()) {
      // a0 e^{l(t-a)} + (a1 - l a0)(t - a) e^{l(t-a)}
      acc.add_scaled({0, l1}, e1 * (1.0 + l1 * a), u0);
      acc.add_scaled({0, l1}, -e1 * a, u1);
      acc.add_scaled({1, l1}, -e1 * l1, u0);
      acc.add_scaled({1, l1}, e1, u1);
    } else if (std::abs(spec.lambda2 - l1) <= kNearConfluentTol) {
      // a0 e^{l1(t-a)} + (a1 - l1 a0) e^{l1(t-a)} sum_j delta^j (t-a)^{j+1} / (j+1)!
      const Complex delta = spec.lambda2 - l1;
      const double ratio = std::abs(delta) * kSeriesWindow;
      acc.add_scaled({0, l1}, e1, u0);
      Complex weight = e1;
      double tail = 1.0;
      for (int m = 1;; ++m) {
        weight /= static_cast<double>(m);
        // (t - a)^m expanded in powers of t
        double binom = 1.0;
        for (int k = m; k >= 0; --k) {
          const Complex c = weight * binom * std::pow(-a, m - k);
          acc.add_scaled({k, l1}, c, u1);
          acc.add_scaled({k, l1}, -c * l1, u0);
          binom = binom * k / static_cast<double>(m - k + 1);
        }
        tail *= ratio / static_cast<double>(m + 1);
        if (tail <= 1e-17) break;
        weight *= delta;
      }
    } else {
      // a0 e^{l1(t-a)} + (a1 - l1 a0)/(l2 - l1) (e^{l2(t-a)} - e^{l1(t-a)})
      const Complex l2 = spec.lambda2;
      const Complex e2 = std::exp(-l2 * a);
      const Complex inv = 1.0 / (l2 - l1);
      acc.add_scaled({0, l1}, e1 * (1.0 + l1 * inv), u0);
      acc.add_scaled({0, l1}, -e1 * inv, u1);
      acc.add_scaled({0, l2}, -e2 * l1 * inv, u0);
      acc.add_scaled({0, l2}, e2 * inv, u1);
    }
  }
  const SeparableFunction forced = op_inverse_apply(spec, source);
  for (const auto& t : forced.terms()) acc.add(t.key, t.coeff);
  return acc.finish();
}

}  // namespace rcas
