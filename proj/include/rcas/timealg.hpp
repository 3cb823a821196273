#pragma once

// Exponential-polynomial functions of time: finite sums of c * t^k * exp(lambda * t)
// with complex c and lambda. Closed under sums, products, d/dt and definite integration,
// which is all the inverse-operator kernels need.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "rcas/errors.hpp"

namespace rcas {

using Complex = std::complex<double>;

namespace timealg {

inline constexpr double kExponentMergeTol = 1e-12;
inline constexpr double kCoeffPruneRel = 1e-14;
inline constexpr double kOverflowGuard = 700.0;
// Exponents with |mu| (|lower| + kTaylorWindow) <= 1 are integrated by a convergent
// series instead of the closed form, whose coefficients k!/mu^{k+1} cancel badly.
inline constexpr double kTaylorWindow = 16.0;

/// Time dependence t^power * exp(exponent * t), the key of every term.
struct TimeKey {
  int power = 0;
  Complex exponent{0.0, 0.0};
};

/// Strict lexicographic order on (power, Re, Im). Merging within tolerance is done
/// by KeyedTerms, not by this comparator.
struct TimeKeyLess {
  bool operator()(const TimeKey& a, const TimeKey& b) const noexcept {
    if (a.power != b.power) return a.power < b.power;
    if (a.exponent.real() != b.exponent.real()) return a.exponent.real() < b.exponent.real();
    return a.exponent.imag() < b.exponent.imag();
  }
};

inline bool same_exponent(Complex a, Complex b) noexcept {
  return std::abs(a - b) <= kExponentMergeTol;
}

inline bool same_key(const TimeKey& a, const TimeKey& b) noexcept {
  return a.power == b.power && same_exponent(a.exponent, b.exponent);
}

/// Ordered map from time key to value whose lookups snap exponents within the merge
/// tolerance onto an already present key.
template <class Value>
class KeyedTerms {
 public:
  using Map = std::map<TimeKey, Value, TimeKeyLess>;

  /// Returns the slot for `key`, creating it if no key within tolerance exists.
  Value& at_or_insert(const TimeKey& key) {
    if (auto it = find_near(key); it != map_.end()) return it->second;
    return map_.emplace(key, Value{}).first->second;
  }

  typename Map::iterator find_near(const TimeKey& key) {
    TimeKey lo{key.power, {key.exponent.real() - kExponentMergeTol, -INFINITY}};
    for (auto it = map_.lower_bound(lo); it != map_.end(); ++it) {
      if (it->first.power != key.power) break;
      if (it->first.exponent.real() > key.exponent.real() + kExponentMergeTol) break;
      if (same_exponent(it->first.exponent, key.exponent)) return it;
    }
    return map_.end();
  }

  Map& map() noexcept { return map_; }
  const Map& map() const noexcept { return map_; }

 private:
  Map map_;
};

struct ExpPolyTerm {
  Complex coeff{0.0, 0.0};
  int power = 0;
  Complex exponent{0.0, 0.0};

  TimeKey key() const noexcept { return {power, exponent}; }
};

/// Canonical sum of ExpPolyTerm: keys unique within tolerance, sorted, and with
/// negligible coefficients dropped. The empty sum is the zero function.
class ExpPoly {
 public:
  ExpPoly() = default;
  explicit ExpPoly(std::vector<ExpPolyTerm> terms) { canonicalize(std::move(terms)); }

  static ExpPoly constant(Complex c) { return ExpPoly({{c, 0, {0.0, 0.0}}}); }
  static ExpPoly monomial(Complex c, int power, Complex exponent) {
    return ExpPoly({{c, power, exponent}});
  }
  /// exp(exponent * t)
  static ExpPoly exponential(Complex exponent) { return monomial(1.0, 0, exponent); }

  std::span<const ExpPolyTerm> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  ExpPoly scaled(Complex c) const {
    std::vector<ExpPolyTerm> out(terms_.begin(), terms_.end());
    for (auto& term : out) term.coeff *= c;
    return ExpPoly(std::move(out));
  }

  friend bool operator==(const ExpPoly& a, const ExpPoly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i) {
      const auto& x = a.terms_[i];
      const auto& y = b.terms_[i];
      if (!same_key(x.key(), y.key()) || x.coeff != y.coeff) return false;
    }
    return true;
  }

 private:
  void canonicalize(std::vector<ExpPolyTerm> raw) {
    KeyedTerms<Complex> merged;
    for (const auto& term : raw) {
      if (term.power < 0) throw Error("negative time power in ExpPoly term");
      merged.at_or_insert(term.key()) += term.coeff;
    }
    double max_abs = 0.0;
    for (const auto& [key, c] : merged.map()) max_abs = std::max(max_abs, std::abs(c));
    const double threshold = kCoeffPruneRel * (1.0 + max_abs);
    terms_.clear();
    for (const auto& [key, c] : merged.map()) {
      if (std::abs(c) > threshold) terms_.push_back({c, key.power, key.exponent});
    }
  }

  std::vector<ExpPolyTerm> terms_;
};

inline ExpPoly ep_add(const ExpPoly& a, const ExpPoly& b) {
  std::vector<ExpPolyTerm> all(a.terms().begin(), a.terms().end());
  all.insert(all.end(), b.terms().begin(), b.terms().end());
  return ExpPoly(std::move(all));
}

inline ExpPoly ep_mul(const ExpPoly& a, const ExpPoly& b) {
  std::vector<ExpPolyTerm> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a.terms()) {
    for (const auto& y : b.terms()) {
      out.push_back({x.coeff * y.coeff, x.power + y.power, x.exponent + y.exponent});
    }
  }
  return ExpPoly(std::move(out));
}

inline ExpPoly ep_diff(const ExpPoly& a) {
  std::vector<ExpPolyTerm> out;
  for (const auto& x : a.terms()) {
    out.push_back({x.coeff * x.exponent, x.power, x.exponent});
    if (x.power > 0) {
      out.push_back({x.coeff * static_cast<double>(x.power), x.power - 1, x.exponent});
    }
  }
  return ExpPoly(std::move(out));
}

/// t -> integral over [lower, t] of a(s) ds, exactly. The lower-limit constant is
/// carried as a (power 0, exponent 0) term.
inline ExpPoly ep_integrate(const ExpPoly& a, double lower) {
  std::vector<ExpPolyTerm> out;
  for (const auto& x : a.terms()) {
    const int k = x.power;
    if (std::abs(x.exponent) <= kExponentMergeTol) {
      const double kp1 = static_cast<double>(k + 1);
      out.push_back({x.coeff / kp1, k + 1, {0.0, 0.0}});
      out.push_back({-x.coeff * std::pow(lower, k + 1) / kp1, 0, {0.0, 0.0}});
      continue;
    }
    const Complex mu = x.exponent;
    const double reach = std::abs(mu) * (std::abs(lower) + kTaylorWindow);
    if (reach <= 1.0) {
      // e^{mu s} F(s) with F(s) = sum_j (-mu)^j k!/(k+j+1)! s^{k+j+1} solves F' + mu F = s^k.
      const Complex e_lower = std::exp(mu * lower);
      Complex c = x.coeff / static_cast<double>(k + 1);
      double size = 1.0;
      Complex at_lower = 0.0;
      for (int j = 0;; ++j) {
        const int power = k + j + 1;
        out.push_back({c, power, mu});
        at_lower += c * std::pow(lower, power) * e_lower;
        size *= reach / static_cast<double>(power + 1);
        if (size <= 1e-17) break;
        c *= -mu / static_cast<double>(power + 1);
      }
      out.push_back({-at_lower, 0, {0.0, 0.0}});
      continue;
    }
    // s^k e^{mu s} has antiderivative e^{mu s} sum_j (-1)^j k!/(k-j)! s^{k-j} / mu^{j+1}.
    Complex falling = 1.0;       // k!/(k-j)!
    Complex inv_mu_pow = 1.0 / mu;  // 1/mu^{j+1}
    Complex at_lower = 0.0;
    const Complex e_lower = std::exp(mu * lower);
    for (int j = 0; j <= k; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const Complex c = x.coeff * sign * falling * inv_mu_pow;
      out.push_back({c, k - j, mu});
      at_lower += c * std::pow(lower, k - j) * e_lower;
      falling *= static_cast<double>(k - j);
      inv_mu_pow /= mu;
    }
    out.push_back({-at_lower, 0, {0.0, 0.0}});
  }
  return ExpPoly(std::move(out));
}

/// Value of t^power exp(exponent t); throws OverflowError past the exponent guard.
inline Complex eval_key(const TimeKey& key, double t) {
  const Complex z = key.exponent * t;
  if (!std::isfinite(t) || std::abs(z.real()) > kOverflowGuard) {
    throw OverflowError("exponent overflow guard exceeded evaluating exp-polynomial at t = " +
                        std::to_string(t));
  }
  Complex v = std::exp(z);
  if (key.power > 0) v *= std::pow(t, key.power);
  return v;
}

inline Complex ep_eval(const ExpPoly& a, double t) {
  Complex sum = 0.0;
  for (const auto& x : a.terms()) sum += x.coeff * eval_key(x.key(), t);
  return sum;
}

inline ExpPoly operator+(const ExpPoly& a, const ExpPoly& b) { return ep_add(a, b); }
inline ExpPoly operator-(const ExpPoly& a, const ExpPoly& b) { return ep_add(a, b.scaled(-1.0)); }
inline ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) { return ep_mul(a, b); }

}  // namespace timealg
}  // namespace rcas
