#pragma once

// Convergence diagnostics: kernel mass of the inverse operator, the contraction
// constant alpha = L1 * mass, the truncation bound M alpha^{q+1} / (L1 (1 - alpha)),
// a sampling estimate of L1 and empirical error tables.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rcas/adomian.hpp"
#include "rcas/operator.hpp"
#include "rcas/solver.hpp"

namespace rcas {

namespace detail {

/// e^w - 1 without cancellation for small |w|.
inline Complex expm1c(Complex w) {
  const double a = w.real();
  const double b = w.imag();
  const double s = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

/// (e^{z tau} - 1) / z, the mass of a first-order kernel; tau at z = 0.
inline Complex first_order_mass(Complex z, double tau) {
  const Complex w = z * tau;
  if (std::abs(w) < 1e-8) return tau * (1.0 + w / 2.0 + w * w / 6.0);
  return expm1c(w) / z;
}

/// Sum_n tau^{n+2}/(n+2)! h_n(l1, l2), with h_n the complete homogeneous polynomial.
inline Complex mass_series(Complex l1, Complex l2, double tau) {
  Complex h = 1.0;       // h_0
  Complex l2pow = 1.0;   // l2^n
  double fact = tau * tau / 2.0;  // tau^{n+2}/(n+2)!
  Complex sum = fact;
  // h_n can vanish for single n (l2 = -l1), so stop on the bound |h_n| <= (n+1) r^n.
  const double r = std::max(std::abs(l1), std::abs(l2));
  double rpow = 1.0;
  for (int n = 1; n < 400; ++n) {
    l2pow *= l2;
    h = l1 * h + l2pow;
    fact *= tau / static_cast<double>(n + 2);
    rpow *= r;
    sum += fact * h;
    if (fact * (n + 1) * rpow <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

/// Green's function of the second-order operator: r -> e[l1, l2](e^{z r}).
inline double green(Complex l1, Complex l2, double r) {
  if (std::abs(l1 - l2) <= kConfluentTol) return (r * std::exp(0.5 * (l1 + l2) * r)).real();
  return ((std::exp(l2 * r) - std::exp(l1 * r)) / (l2 - l1)).real();
}

}  // namespace detail

struct KernelMass {
  double value = 0.0;          // used in alpha
  double closed_form = 0.0;    // the signed closed form
  bool used_absolute = false;  // closed form was negative, value is the integral of |G|
  std::string note;
};

/// O^{-1}[1] at the horizon, with the analytic limits for zero and confluent roots.
inline KernelMass kernel_mass_report(const LinearOperatorSpec& spec, double horizon) {
  const double tau = horizon - spec.base_time;
  if (!(tau > 0.0)) throw ConfigError("horizon must exceed the base time");
  const Complex l1 = spec.lambda1;
  const Complex l2 = spec.lambda2;
  Complex m;
  if (spec.order == 1) {
    m = detail::first_order_mass(l1, tau);
  } else if (std::max(std::abs(l1), std::abs(l2)) * tau <= 1.0) {
    m = detail::mass_series(l1, l2, tau);
  } else if (std::abs(l1 - l2) * tau < 1e-6) {
    // Confluent limit at the midpoint: d/dz (e^{z tau} - 1)/z.
    const Complex z = 0.5 * (l1 + l2);
    m = tau * std::exp(z * tau) / z - detail::expm1c(z * tau) / (z * z);
  } else {
    m = (detail::first_order_mass(l1, tau) - detail::first_order_mass(l2, tau)) / (l1 - l2);
  }
  if (std::abs(m.imag()) > 1e-10 * (1.0 + std::abs(m.real()))) {
    throw ToleranceViolation("kernel mass has imaginary part " + std::to_string(m.imag()) +
                             "; roots are not real or conjugate");
  }
  KernelMass out;
  out.closed_form = m.real();
  out.value = m.real();
  if (m.real() < 0.0 && spec.order == 2) {
    auto g = [&](double r) { return std::abs(detail::green(l1, l2, r)); };
    out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, tau, 15,
                                                                             1e-12);
    out.used_absolute = true;
    out.note = "closed-form kernel mass " + std::to_string(m.real()) +
               " is negative; using the integral of the absolute kernel instead";
  }
  return out;
}

inline double kernel_mass(const LinearOperatorSpec& spec, double horizon) {
  return kernel_mass_report(spec, horizon).value;
}

inline double contraction_alpha(double L1, const LinearOperatorSpec& spec, double horizon) {
  if (!(L1 > 0.0) || !std::isfinite(L1)) throw ConfigError("L1 must be a positive number");
  return L1 * kernel_mass(spec, horizon);
}

inline double truncation_bound(double M, double L1, double alpha, int q) {
  if (!(L1 > 0.0)) throw ConfigError("L1 must be a positive number");
  if (!(M >= 0.0)) throw ConfigError("M must be non-negative");
  if (q < 0) throw ConfigError("q must be non-negative");
  if (!(alpha < 1.0)) {
    throw NotContractive("alpha = " + std::to_string(alpha) + " is not below 1");
  }
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  return M * std::pow(alpha, q + 1) / (L1 * (1.0 - alpha));
}

struct ConvergenceReport {
  double alpha = 0.0;
  double kernel_mass = 0.0;
  double L1 = 0.0;
  bool L1_estimated = false;  // sampling estimate, a lower bound in general
  double M = 0.0;             // max |Abar_0| over plan points x time samples
  std::vector<double> bound_per_q;  // empty when not contractive
  bool contractive = false;
  std::vector<std::string> notes;
};

inline ConvergenceReport convergence_report(const ProblemSpec& p, const SeriesSolution& sol,
                                            double L1, int q_max, bool L1_estimated = false) {
  if (p.op.order != 2) throw ConfigError("the truncation bound needs a second order operator");
  ConvergenceReport r;
  const KernelMass km = kernel_mass_report(p.op, p.horizon);
  r.kernel_mass = km.value;
  if (km.used_absolute) r.notes.push_back(km.note);
  r.L1 = L1;
  r.L1_estimated = L1_estimated;
  r.alpha = contraction_alpha(L1, p.op, p.horizon);
  SeparableFunction a0 =
      sol.adomian.empty() ? jet_eval(p.nonlinearity, sol.corrections.at(0)) : sol.adomian[0];
  // Chebyshev nodes avoid the endpoints, where |Abar_0| often peaks.
  spatial::SamplePlan m_plan = sol.plan;
  m_plan.times.push_back(p.op.base_time);
  m_plan.times.push_back(p.horizon);
  r.M = sf_max_abs(a0, m_plan);
  r.notes.push_back("M is sampled on " + std::to_string(m_plan.points.size()) +
                    " points x " + std::to_string(m_plan.times.size()) + " times");
  if (L1_estimated) r.notes.push_back("L1 is a sampling estimate (a lower estimate)");
  r.contractive = r.alpha < 1.0;
  if (r.contractive) {
    for (int q = 0; q <= q_max; ++q) r.bound_per_q.push_back(truncation_bound(r.M, L1, r.alpha, q));
  } else {
    r.notes.push_back("alpha >= 1: not contractive, bounds unavailable");
  }
  return r;
}

/// Heuristic lower estimate of the Lipschitz constant of N over the ball |u| <= radius:
/// the largest ratio max|N[u] - N[v]| / max|u - v| over random low-degree polynomial
/// pairs u, v inside the ball, evaluated on a grid of the box.
inline double estimate_L1(const JetPolynomial& n, const spatial::Box& box, double radius,
                          int samples = 200, std::uint64_t seed = 20240607) {
  if (samples < 100) throw ConfigError("estimate_L1 needs at least 100 samples");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  if (n.is_zero()) return 0.0;
  const int dim = static_cast<int>(box.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const spatial::SamplePlan grid = spatial::make_plan(box, {}, 17);

  // Random polynomial of degree <= 2 in each variable, value range inside the ball.
  auto random_function = [&]() {
    std::vector<Expr> terms{Expr::constant(radius * unit(rng))};
    const double wiggle = 0.3 * radius * std::abs(unit(rng));
    for (int d = 0; d < dim; ++d) {
      const spatial::Interval iv = box[static_cast<std::size_t>(d)];
      const double mid = 0.5 * (iv.lo + iv.hi);
      const double half = 0.5 * (iv.hi - iv.lo);
      using spatial::operator*;
      using spatial::operator-;
      Expr s = Expr::constant(1.0 / half) * (Expr::var(d) - Expr::constant(mid));
      terms.push_back(Expr::constant(wiggle * unit(rng)) * s);
      terms.push_back(Expr::constant(wiggle * unit(rng)) * (s * s));
    }
    return spatial::sx_simplify(Expr::sum(std::move(terms)));
  };
  auto jet_values = [&](const Expr& u, const std::vector<double>& p) {
    std::vector<double> out;
    for (const auto& m : n.monomials()) {
      double v = spatial::sx_eval(m.coeff, p);
      for (const auto& f : m.factors) {
        Expr d = u;
        for (int var = 0; var < dim; ++var) {
          for (int k = 0; k < f.index[static_cast<std::size_t>(var)]; ++k) d = spatial::sx_diff(d, var);
        }
        v *= std::pow(spatial::sx_eval(d, p), f.exponent);
      }
      out.push_back(v);
    }
    double s = 0.0;
    for (double v : out) s += v;
    return s;
  };
  auto clip = [&](Expr u) {
    double m = 0.0;
    for (const auto& p : grid.points) m = std::max(m, std::abs(spatial::sx_eval(u, p)));
    using spatial::operator*;
    return m > radius ? Expr::constant(radius / m) * u : u;
  };
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    Expr u = clip(random_function());
    Expr v = clip(random_function());
    if (s % 2 == 1) {
      // Nearby pairs probe the local slope, where the supremum is usually attained.
      using spatial::operator*;
      using spatial::operator+;
      v = clip(u + Expr::constant(1e-3) * random_function());
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : grid.points) {
      num = std::max(num, std::abs(jet_values(u, p) - jet_values(v, p)));
      den = std::max(den, std::abs(spatial::sx_eval(u, p) - spatial::sx_eval(v, p)));
    }
    if (den > 1e-14) best = std::max(best, num / den);
  }
  return best;
}

struct ErrorRow {
  std::vector<double> point;
  double t = 0.0;
  double error = 0.0;
};

struct ErrorTable {
  int n = 0;
  std::vector<ErrorRow> rows;
};

/// E_n = |exact - S_n| on the grid, rows ordered point-major then t.
inline ErrorTable error_table(const SeriesSolution& sol, const SeparableFunction& exact,
                              const std::vector<std::vector<double>>& points,
                              const std::vector<double>& ts, int n) {
  const SeparableFunction s = partial_sum(sol, n);
  ErrorTable table;
  table.n = n;
  for (const auto& p : points) {
    for (double t : ts) {
      const double e = std::abs(sf_eval(exact, p, t) - sf_eval(s, p, t));
      table.rows.push_back({p, t, e});
    }
  }
  return table;
}

}  // namespace rcas
