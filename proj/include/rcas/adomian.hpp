#pragma once

// Polynomial nonlinearities over jet variables and both Adomian polynomial families.
//
// Revised (telescoping) family: Abar_0 = N[u_0], Abar_m = N[S_m] - sum_{k<m} Abar_k,
// where S_m = u_0 + ... + u_m. Classical family: A_m is the eps^m coefficient of
// N[sum_k u_k eps^k], computed by truncated series arithmetic.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcas/separable.hpp"
#include "rcas/spatial/calculus.hpp"
#include "rcas/spatial/print.hpp"

namespace rcas {

using spatial::JetIndex;

inline constexpr int kDefaultMaxJetOrder = 6;

struct JetFactor {
  JetIndex index;
  int exponent = 1;

  friend bool operator==(const JetFactor&, const JetFactor&) = default;
};

struct JetMonomial {
  Expr coeff;
  std::vector<JetFactor> factors;  // sorted by index, exponents positive

  int degree() const {
    int d = 0;
    for (const auto& f : factors) d += f.exponent;
    return d;
  }
};

class JetPolynomial {
 public:
  JetPolynomial() = default;

  /// Builds N from an expression containing jet variables. The expression is
  /// expanded; every term must be a spatial coefficient times a product of positive
  /// integer powers of jet variables.
  static JetPolynomial from_expr(const Expr& e, int dim, int max_order = kDefaultMaxJetOrder) {
    using spatial::Kind;
    JetPolynomial out;
    out.dim_ = dim;
    out.max_order_ = max_order;
    const Expr expanded = spatial::sx_expand(e);
    if (expanded.is_zero()) return out;
    std::vector<Expr> terms;
    if (expanded.kind() == Kind::Sum) {
      terms.assign(expanded.children().begin(), expanded.children().end());
    } else {
      terms.push_back(expanded);
    }
    std::map<std::vector<std::pair<JetIndex, int>>, std::vector<Expr>> grouped;
    for (const auto& term : terms) {
      std::vector<Expr> factors;
      if (term.kind() == Kind::Product) {
        factors.assign(term.children().begin(), term.children().end());
      } else {
        factors.push_back(term);
      }
      std::vector<Expr> coeff;
      std::map<JetIndex, int> jets;
      for (const auto& f : factors) {
        if (f.kind() == Kind::Jet) {
          jets[normalized(f.jet_index(), dim)] += 1;
        } else if (f.kind() == Kind::Power && f.child().kind() == Kind::Jet) {
          const auto p = f.exponent();
          if (!p.is_integer() || p.num() <= 0) {
            throw NonPolynomialNonlinearity("nonlinearity has a non-polynomial power of " +
                                            spatial::sx_print(f.child()));
          }
          jets[normalized(f.child().jet_index(), dim)] += static_cast<int>(p.num());
        } else if (spatial::contains_kind(f, Kind::Jet)) {
          throw NonPolynomialNonlinearity("nonlinearity is not polynomial in the jet variables: " +
                                          spatial::sx_print(f));
        } else {
          coeff.push_back(f);
        }
      }
      if (jets.empty()) {
        throw ConfigError("nonlinearity term " + spatial::sx_print(term) +
                          " has no jet factor; move it to the source");
      }
      for (const auto& [j, n] : jets) {
        if (spatial::jet_order(j) > max_order) {
          throw MaxOrderExceeded("jet order " + std::to_string(spatial::jet_order(j)) +
                                 " exceeds the maximum " + std::to_string(max_order));
        }
      }
      std::vector<std::pair<JetIndex, int>> key(jets.begin(), jets.end());
      grouped[key].push_back(coeff.empty() ? Expr::constant(1.0)
                                           : spatial::detail::simplify_product(std::move(coeff)));
    }
    for (auto& [key, coeffs] : grouped) {
      Expr c = spatial::sx_expand(spatial::detail::simplify_sum(std::move(coeffs)));
      if (c.is_zero()) continue;
      JetMonomial m{c, {}};
      for (const auto& [j, n] : key) m.factors.push_back({j, n});
      out.monomials_.push_back(std::move(m));
    }
    return out;
  }

  int dim() const noexcept { return dim_; }
  int max_order() const noexcept { return max_order_; }
  const std::vector<JetMonomial>& monomials() const noexcept { return monomials_; }
  bool is_zero() const noexcept { return monomials_.empty(); }

  /// Highest derivative order used by any factor.
  int order() const {
    int o = 0;
    for (const auto& m : monomials_) {
      for (const auto& f : m.factors) o = std::max(o, spatial::jet_order(f.index));
    }
    return o;
  }

  /// Highest total degree in the jet variables.
  int degree() const {
    int d = 0;
    for (const auto& m : monomials_) d = std::max(d, m.degree());
    return d;
  }

  /// Back to an expression over jet symbols.
  Expr to_expr() const {
    std::vector<Expr> terms;
    for (const auto& m : monomials_) {
      std::vector<Expr> f{m.coeff};
      for (const auto& j : m.factors) {
        f.push_back(spatial::pow(Expr::jet(j.index), spatial::Rational(j.exponent)));
      }
      terms.push_back(spatial::detail::simplify_product(std::move(f)));
    }
    return terms.empty() ? Expr::constant(0.0) : spatial::detail::simplify_sum(std::move(terms));
  }

 private:
  static JetIndex normalized(JetIndex j, int dim) {
    if (static_cast<int>(j.size()) > dim) {
      for (std::size_t i = static_cast<std::size_t>(dim); i < j.size(); ++i) {
        if (j[i] != 0) throw ConfigError("jet variable differentiates a non-spatial variable");
      }
    }
    j.resize(static_cast<std::size_t>(dim), 0);
    return j;
  }

  int dim_ = 1;
  int max_order_ = kDefaultMaxJetOrder;
  std::vector<JetMonomial> monomials_;
};

/// Total derivative D_var N: product rule over the jet factors plus the derivative of
/// the spatial coefficients.
inline JetPolynomial jet_total_derivative(const JetPolynomial& n, int var) {
  if (var < 0 || var >= n.dim()) throw Error("total derivative variable out of range");
  for (const auto& m : n.monomials()) {
    for (const auto& f : m.factors) {
      if (spatial::jet_order(f.index) + 1 > n.max_order()) {
        throw MaxOrderExceeded("total derivative would need jet order " +
                               std::to_string(spatial::jet_order(f.index) + 1) + " > " +
                               std::to_string(n.max_order()));
      }
    }
  }
  return JetPolynomial::from_expr(spatial::sx_diff(n.to_expr(), var), n.dim(), n.max_order());
}

/// Spatial derivatives D^J u, computed once each.
class DerivativeCache {
 public:
  explicit DerivativeCache(const SeparableFunction& u) : u_(u) {}

  const SeparableFunction& get(const JetIndex& j) {
    if (std::all_of(j.begin(), j.end(), [](int o) { return o == 0; })) return u_;
    if (auto it = cache_.find(j); it != cache_.end()) return it->second;
    JetIndex lower = j;
    std::size_t var = 0;
    while (lower[var] == 0) ++var;
    lower[var] -= 1;
    SeparableFunction d = sf_diff_x(get(lower), static_cast<int>(var));
    return cache_.emplace(j, std::move(d)).first->second;
  }

 private:
  const SeparableFunction& u_;
  std::map<JetIndex, SeparableFunction> cache_;
};

/// N[u]: each jet variable replaced by the corresponding derivative of u.
inline SeparableFunction jet_eval(const JetPolynomial& n, const SeparableFunction& u,
                                  const spatial::SamplePlan* plan = nullptr) {
  DerivativeCache derivs(u);
  std::vector<SeparableFunction> parts;
  for (const auto& m : n.monomials()) {
    SeparableFunction prod = SeparableFunction::spatial(m.coeff, u.dim(), u.budget());
    for (const auto& f : m.factors) {
      const SeparableFunction& d = derivs.get(f.index);
      for (int e = 0; e < f.exponent; ++e) prod = sf_mul(prod, d);
    }
    parts.push_back(std::move(prod));
  }
  SeparableFunction out = sf_sum(parts, u.dim(), u.budget());
  return plan ? sf_prune(out, *plan) : out;
}

/// Generator for the revised family. Feed corrections in order; each call returns the
/// next polynomial. N[S_{m-1}] is cached so the subtracted sum is never recomputed.
class RevisedAdomian {
 public:
  explicit RevisedAdomian(JetPolynomial n, const spatial::SamplePlan* plan = nullptr)
      : n_(std::move(n)), plan_(plan) {}

  /// Abar_m after appending u_m.
  SeparableFunction next(const SeparableFunction& u_m) {
    if (!partial_) {
      partial_ = u_m;
      previous_ = jet_eval(n_, *partial_, plan_);
      history_.push_back(*previous_);
      return history_.back();
    }
    partial_ = sf_add(*partial_, u_m);
    SeparableFunction now = jet_eval(n_, *partial_, plan_);
    SeparableFunction abar = sf_sub(now, *previous_);
    if (plan_) abar = sf_prune(abar, *plan_);
    previous_ = std::move(now);
    history_.push_back(abar);
    return abar;
  }

  const std::vector<SeparableFunction>& history() const noexcept { return history_; }
  /// N[S_m] for the latest m.
  const std::optional<SeparableFunction>& current_image() const noexcept { return previous_; }
  const std::optional<SeparableFunction>& partial_sum() const noexcept { return partial_; }

 private:
  JetPolynomial n_;
  const spatial::SamplePlan* plan_;
  std::optional<SeparableFunction> partial_;
  std::optional<SeparableFunction> previous_;
  std::vector<SeparableFunction> history_;
};

/// Abar_m for m = corrections.size() - 1.
inline SeparableFunction adomian_revised(const JetPolynomial& n,
                                         std::span<const SeparableFunction> corrections,
                                         const spatial::SamplePlan* plan = nullptr) {
  if (corrections.empty()) throw Error("adomian_revised needs at least u_0");
  RevisedAdomian gen(n, plan);
  SeparableFunction out;
  for (const auto& u : corrections) out = gen.next(u);
  return out;
}

/// Formal power series in eps truncated after order m.
class EpsilonSeries {
 public:
  EpsilonSeries(std::vector<SeparableFunction> coeffs) : c_(std::move(coeffs)) {  // NOLINT
    if (c_.empty()) throw Error("epsilon series needs at least one coefficient");
  }

  static EpsilonSeries constant(const SeparableFunction& f, std::size_t length) {
    std::vector<SeparableFunction> c(length, SeparableFunction(f.dim(), f.budget()));
    c[0] = f;
    return EpsilonSeries(std::move(c));
  }

  std::size_t length() const noexcept { return c_.size(); }
  const SeparableFunction& operator[](std::size_t k) const { return c_.at(k); }

  friend EpsilonSeries operator*(const EpsilonSeries& a, const EpsilonSeries& b) {
    const std::size_t n = std::min(a.length(), b.length());
    const int dim = a.c_[0].dim();
    const std::size_t budget = a.c_[0].budget();
    std::vector<SeparableFunction> out;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<SeparableFunction> parts;
      for (std::size_t i = 0; i <= k; ++i) {
        if (a.c_[i].is_zero() || b.c_[k - i].is_zero()) continue;
        parts.push_back(sf_mul(a.c_[i], b.c_[k - i]));
      }
      out.push_back(sf_sum(parts, dim, budget));
    }
    return EpsilonSeries(std::move(out));
  }

  friend EpsilonSeries operator+(const EpsilonSeries& a, const EpsilonSeries& b) {
    const std::size_t n = std::min(a.length(), b.length());
    std::vector<SeparableFunction> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(sf_add(a.c_[k], b.c_[k]));
    return EpsilonSeries(std::move(out));
  }

 private:
  std::vector<SeparableFunction> c_;
};

/// Classical A_m with m = corrections.size() - 1: the eps^m coefficient of
/// N[sum_k u_k eps^k], using u_0..u_m only.
inline SeparableFunction adomian_classical(const JetPolynomial& n,
                                           std::span<const SeparableFunction> corrections,
                                           const spatial::SamplePlan* plan = nullptr) {
  if (corrections.empty()) throw Error("adomian_classical needs at least u_0");
  const std::size_t len = corrections.size();
  const int dim = corrections[0].dim();
  const std::size_t budget = corrections[0].budget();
  std::vector<DerivativeCache> caches;
  caches.reserve(len);
  for (const auto& u : corrections) caches.emplace_back(u);
  std::map<JetIndex, EpsilonSeries> series;
  auto series_of = [&](const JetIndex& j) -> const EpsilonSeries& {
    if (auto it = series.find(j); it != series.end()) return it->second;
    std::vector<SeparableFunction> c;
    for (auto& cache : caches) c.push_back(cache.get(j));
    return series.emplace(j, EpsilonSeries(std::move(c))).first->second;
  };
  std::vector<SeparableFunction> parts;
  for (const auto& m : n.monomials()) {
    EpsilonSeries prod =
        EpsilonSeries::constant(SeparableFunction::spatial(m.coeff, dim, budget), len);
    for (const auto& f : m.factors) {
      const EpsilonSeries& s = series_of(f.index);
      for (int e = 0; e < f.exponent; ++e) prod = prod * s;
    }
    parts.push_back(prod[len - 1]);
  }
  SeparableFunction out = sf_sum(parts, dim, budget);
  return plan ? sf_prune(out, *plan) : out;
}

}  // namespace rcas
