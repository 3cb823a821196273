#pragma once

// Separable functions u(X, t) = sum_j F_j(X) g_j(t) where each g_j is a single
// time key t^k e^{lambda t}. Coefficients are complex-valued spatial expressions held
// as a (real part, imaginary part) pair, since spatial expressions are real.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcas/spatial/calculus.hpp"
#include "rcas/spatial/sample_plan.hpp"
#include "rcas/timealg.hpp"

namespace rcas {

using spatial::Expr;
using timealg::TimeKey;

inline constexpr std::size_t kDefaultTermBudget = 10000;
inline constexpr double kDefaultPruneTol = 1e-14;
inline constexpr double kImagResidueTol = 1e-10;

struct ComplexExpr {
  Expr re;
  Expr im;

  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  bool is_real() const { return im.is_zero(); }

  Complex eval(std::span<const double> point) const {
    const double r = re.is_zero() ? 0.0 : spatial::sx_eval(re, point);
    const double i = im.is_zero() ? 0.0 : spatial::sx_eval(im, point);
    return {r, i};
  }

  friend bool operator==(const ComplexExpr& a, const ComplexExpr& b) {
    return a.re == b.re && a.im == b.im;
  }
};

struct SeparableTerm {
  TimeKey key;
  ComplexExpr coeff;
};

class SeparableFunction;

/// Collects contributions per time key and finalizes each coefficient once, so
/// symbolic cancellation between contributions is exact.
class TermAccumulator {
 public:
  explicit TermAccumulator(int dim, std::size_t budget = kDefaultTermBudget)
      : dim_(dim), budget_(budget) {}

  void add(const TimeKey& key, const Expr& re, const Expr& im) {
    if (re.is_zero() && im.is_zero()) return;
    Parts& p = parts_.at_or_insert(key);
    if (!re.is_zero()) p.re.push_back(re);
    if (!im.is_zero()) p.im.push_back(im);
  }

  void add(const TimeKey& key, const ComplexExpr& c) { add(key, c.re, c.im); }

  /// Adds s * c, with `s` a complex scalar.
  void add_scaled(const TimeKey& key, Complex s, const ComplexExpr& c) {
    if (s == Complex(0.0, 0.0)) return;
    using spatial::operator*;
    const double sr = s.real();
    const double si = s.imag();
    Parts& p = parts_.at_or_insert(key);
    auto push = [](std::vector<Expr>& v, double k, const Expr& e) {
      if (k != 0.0 && !e.is_zero()) v.push_back(k == 1.0 ? e : Expr::constant(k) * e);
    };
    push(p.re, sr, c.re);
    push(p.re, -si, c.im);
    push(p.im, sr, c.im);
    push(p.im, si, c.re);
  }

  inline SeparableFunction finish();

 private:
  struct Parts {
    std::vector<Expr> re;
    std::vector<Expr> im;
  };

  static Expr combine(std::vector<Expr>& v) {
    if (v.empty()) return Expr::constant(0.0);
    Expr s = v.size() == 1 ? v.front() : spatial::detail::simplify_sum(std::move(v));
    return spatial::sx_expand(s);
  }

  int dim_;
  std::size_t budget_;
  timealg::KeyedTerms<Parts> parts_;
};

class SeparableFunction {
 public:
  explicit SeparableFunction(int dim = 1, std::size_t budget = kDefaultTermBudget)
      : dim_(dim), budget_(budget) {}

  /// F(X) * g(t) for an exp-polynomial g.
  static SeparableFunction product(const Expr& spatial_part, const timealg::ExpPoly& g, int dim,
                                   std::size_t budget = kDefaultTermBudget) {
    TermAccumulator acc(dim, budget);
    const ComplexExpr c{spatial::sx_simplify(spatial_part), Expr::constant(0.0)};
    for (const auto& term : g.terms()) acc.add_scaled(term.key(), term.coeff, c);
    return acc.finish();
  }

  /// Time-independent F(X).
  static SeparableFunction spatial(const Expr& f, int dim,
                                   std::size_t budget = kDefaultTermBudget) {
    return product(f, timealg::ExpPoly::constant(1.0), dim, budget);
  }

  int dim() const noexcept { return dim_; }
  std::size_t budget() const noexcept { return budget_; }
  /// Same terms, with the budget that results derived from this function inherit.
  SeparableFunction with_budget(std::size_t budget) const {
    SeparableFunction out = *this;
    out.budget_ = budget;
    return out;
  }
  std::span<const SeparableTerm> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Total expression nodes across coefficients, a measure of symbolic size.
  std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& t : terms_) n += t.coeff.re.size() + t.coeff.im.size();
    return n;
  }

  const ComplexExpr* find(const TimeKey& key) const {
    for (const auto& t : terms_) {
      if (timealg::same_key(t.key, key)) return &t.coeff;
    }
    return nullptr;
  }

  friend bool operator==(const SeparableFunction& a, const SeparableFunction& b) {
    if (a.dim_ != b.dim_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      if (!timealg::same_key(a.terms_[i].key, b.terms_[i].key)) return false;
      if (!(a.terms_[i].coeff == b.terms_[i].coeff)) return false;
    }
    return true;
  }

 private:
  friend class TermAccumulator;
  int dim_;
  std::size_t budget_;
  std::vector<SeparableTerm> terms_;
};

inline SeparableFunction TermAccumulator::finish() {
  SeparableFunction out(dim_, budget_);
  for (auto& [key, parts] : parts_.map()) {
    ComplexExpr c{combine(parts.re), combine(parts.im)};
    if (c.is_zero()) continue;
    out.terms_.push_back({key, std::move(c)});
  }
  parts_.map().clear();
  if (out.terms_.size() > budget_) throw TermBudgetExceeded(out.terms_.size(), budget_);
  return out;
}

namespace detail {

inline void require_same_dim(const SeparableFunction& a, const SeparableFunction& b) {
  if (a.dim() != b.dim()) {
    throw Error("separable functions of different dimension (" + std::to_string(a.dim()) +
                " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace detail

inline SeparableFunction sf_add(const SeparableFunction& a, const SeparableFunction& b) {
  detail::require_same_dim(a, b);
  TermAccumulator acc(a.dim(), std::max(a.budget(), b.budget()));
  for (const auto& t : a.terms()) acc.add(t.key, t.coeff);
  for (const auto& t : b.terms()) acc.add(t.key, t.coeff);
  return acc.finish();
}

inline SeparableFunction sf_scale(const SeparableFunction& a, Complex s) {
  TermAccumulator acc(a.dim(), a.budget());
  for (const auto& t : a.terms()) acc.add_scaled(t.key, s, t.coeff);
  return acc.finish();
}

inline SeparableFunction sf_sub(const SeparableFunction& a, const SeparableFunction& b) {
  detail::require_same_dim(a, b);
  TermAccumulator acc(a.dim(), std::max(a.budget(), b.budget()));
  for (const auto& t : a.terms()) acc.add(t.key, t.coeff);
  for (const auto& t : b.terms()) acc.add_scaled(t.key, -1.0, t.coeff);
  return acc.finish();
}

/// Sum of many functions with a single finalization per key.
inline SeparableFunction sf_sum(std::span<const SeparableFunction> fs, int dim,
                                std::size_t budget = kDefaultTermBudget) {
  TermAccumulator acc(dim, budget);
  for (const auto& f : fs) {
    if (f.dim() != dim) throw Error("separable sum over mixed dimensions");
    for (const auto& t : f.terms()) acc.add(t.key, t.coeff);
  }
  return acc.finish();
}

namespace detail {

inline void add_product(TermAccumulator& acc, const SeparableTerm& x, const SeparableTerm& y,
                        Complex scale = 1.0) {
  using spatial::operator*;
  const TimeKey key{x.key.power + y.key.power, x.key.exponent + y.key.exponent};
  const ComplexExpr& a = x.coeff;
  const ComplexExpr& b = y.coeff;
  ComplexExpr p;
  const bool ar = a.is_real();
  const bool br = b.is_real();
  if (ar && br) {
    p = {a.re * b.re, Expr::constant(0.0)};
  } else if (ar) {
    p = {a.re * b.re, a.re * b.im};
  } else if (br) {
    p = {a.re * b.re, a.im * b.re};
  } else {
    p = {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  if (scale == Complex(1.0, 0.0)) {
    acc.add(key, p);
  } else {
    acc.add_scaled(key, scale, p);
  }
}

}  // namespace detail

inline SeparableFunction sf_mul(const SeparableFunction& a, const SeparableFunction& b) {
  detail::require_same_dim(a, b);
  TermAccumulator acc(a.dim(), std::max(a.budget(), b.budget()));
  for (const auto& x : a.terms()) {
    for (const auto& y : b.terms()) detail::add_product(acc, x, y);
  }
  return acc.finish();
}

inline SeparableFunction sf_diff_x(const SeparableFunction& f, int var) {
  if (var < 0 || var >= f.dim()) throw Error("differentiation variable out of range");
  TermAccumulator acc(f.dim(), f.budget());
  for (const auto& t : f.terms()) {
    acc.add(t.key, spatial::sx_diff(t.coeff.re, var), spatial::sx_diff(t.coeff.im, var));
  }
  return acc.finish();
}

inline SeparableFunction sf_diff_t(const SeparableFunction& f) {
  TermAccumulator acc(f.dim(), f.budget());
  for (const auto& t : f.terms()) {
    acc.add_scaled(t.key, t.key.exponent, t.coeff);
    if (t.key.power > 0) {
      acc.add_scaled({t.key.power - 1, t.key.exponent}, static_cast<double>(t.key.power),
                     t.coeff);
    }
  }
  return acc.finish();
}

/// Complex value at (point, t) without the realness check.
inline Complex sf_eval_complex(const SeparableFunction& f, std::span<const double> point,
                               double t) {
  if (static_cast<int>(point.size()) < f.dim()) throw Error("evaluation point too short");
  Complex sum = 0.0;
  for (const auto& term : f.terms()) {
    const Complex c = term.coeff.eval(point);
    sum += c * timealg::eval_key(term.key, t);
  }
  return sum;
}

/// Real value at (point, t). A significant imaginary part means the complex
/// exponentials are not paired with conjugate coefficients.
inline double sf_eval(const SeparableFunction& f, std::span<const double> point, double t) {
  const Complex v = sf_eval_complex(f, point, t);
  if (std::abs(v.imag()) > kImagResidueTol * (1.0 + std::abs(v.real()))) {
    throw ToleranceViolation("imaginary residue " + std::to_string(v.imag()) +
                             " in separable evaluation");
  }
  return v.real();
}

inline double sf_eval(const SeparableFunction& f, std::initializer_list<double> point, double t) {
  return sf_eval(f, std::span<const double>(point.begin(), point.size()), t);
}

/// Largest |t^k e^{lambda t}| over the plan's time samples (1 when there are none).
inline double key_weight(const TimeKey& key, const spatial::SamplePlan& plan) {
  if (plan.times.empty()) return 1.0;
  double w = 0.0;
  for (double t : plan.times) w = std::max(w, std::abs(timealg::eval_key(key, t)));
  return w;
}

/// Drops keys whose weighted coefficient is negligible at every plan point, relative to
/// the plan's scale. `tol` is the relative threshold.
inline SeparableFunction sf_prune(const SeparableFunction& f, const spatial::SamplePlan& plan,
                                  double tol = kDefaultPruneTol) {
  spatial::SamplePlan p = plan;
  p.tol = tol;
  TermAccumulator acc(f.dim(), f.budget());
  for (const auto& term : f.terms()) {
    const double w = key_weight(term.key, plan);
    bool negligible = w == 0.0;
    if (!negligible) {
      p.scale = (1.0 + plan.scale) / w - 1.0;
      const bool re_zero = spatial::sx_is_zero(term.coeff.re, p);
      negligible = re_zero && spatial::sx_is_zero(term.coeff.im, p);
    }
    if (!negligible) acc.add(term.key, term.coeff);
  }
  return acc.finish();
}

/// Largest |f| over plan points x plan times. Points where f cannot be evaluated are
/// skipped.
inline double sf_max_abs(const SeparableFunction& f, const spatial::SamplePlan& plan) {
  double m = 0.0;
  const std::vector<double> times = plan.times.empty() ? std::vector<double>{0.0} : plan.times;
  for (const auto& p : plan.points) {
    for (double t : times) {
      try {
        m = std::max(m, std::abs(sf_eval_complex(f, p, t)));
      } catch (const DomainEvaluationError&) {
      }
    }
  }
  return m;
}

/// Certifies f == 0 on every (point, time) sample of the plan.
inline bool sf_is_zero(const SeparableFunction& f, const spatial::SamplePlan& plan) {
  if (f.is_zero()) return true;
  const std::vector<double> times = plan.times.empty() ? std::vector<double>{0.0} : plan.times;
  std::size_t usable = 0;
  for (const auto& p : plan.points) {
    Complex probe;
    try {
      probe = sf_eval_complex(f, p, times.front());
    } catch (const DomainEvaluationError&) {
      continue;
    }
    ++usable;
    if (std::abs(probe) > plan.threshold()) return false;
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (std::abs(sf_eval_complex(f, p, times[i])) > plan.threshold()) return false;
    }
  }
  if (usable < spatial::kMinUsablePoints) {
    throw ZeroTestInconclusive("only " + std::to_string(usable) +
                               " plan points were evaluable for the zero test");
  }
  return true;
}

inline SeparableFunction operator+(const SeparableFunction& a, const SeparableFunction& b) {
  return sf_add(a, b);
}
inline SeparableFunction operator-(const SeparableFunction& a, const SeparableFunction& b) {
  return sf_sub(a, b);
}
inline SeparableFunction operator*(const SeparableFunction& a, const SeparableFunction& b) {
  return sf_mul(a, b);
}

}  // namespace rcas
