#pragma once

// Immutable expression trees over the spatial variables x_0 .. x_{n-1}.
//
// Nodes are shared (a tree may be a DAG in memory) and never mutated after
// construction, so copies are cheap and concurrent reads are safe.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcas/errors.hpp"

namespace rcas::spatial {

/// Exact rational number kept in lowest terms with a positive denominator.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {  // NOLINT
    if (den_ == 0) throw Error("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_integer() const noexcept { return den_ == 1; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
  friend bool operator==(Rational a, Rational b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend int compare(Rational a, Rational b) noexcept {
    __extension__ typedef __int128 Wide;  // cross products of 64-bit parts cannot overflow
    const auto l = static_cast<Wide>(a.num_) * b.den_;
    const auto r = static_cast<Wide>(b.num_) * a.den_;
    return l < r ? -1 : (l > r ? 1 : 0);
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Best rational approximation of `v` with denominator at most `max_den`; throws
/// if no such rational lies within a relative 1e-12 of `v`.
inline Rational to_rational(double v, std::int64_t max_den = 1000000) {
  if (!std::isfinite(v)) throw Error("non-finite value cannot be a rational exponent");
  const double tol = 1e-12 * std::max(1.0, std::abs(v));
  if (std::abs(v - std::round(v)) <= tol) return {static_cast<std::int64_t>(std::round(v)), 1};
  // Continued fraction convergents.
  std::int64_t h0 = 1, h1 = 0, k0 = 0, k1 = 1;
  double x = v;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h0 + h1;
    const std::int64_t k2 = ai * k0 + k1;
    if (k2 > max_den) break;
    h1 = h0;
    h0 = h2;
    k1 = k0;
    k0 = k2;
    if (std::abs(static_cast<double>(h0) / static_cast<double>(k0) - v) <= tol) return {h0, k0};
    const double frac = x - a;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  throw Error("exponent " + std::to_string(v) + " is not a recognizable rational");
}

/// Node kinds. The declaration order is the canonical ordering rank.
enum class Kind : std::uint8_t {
  Constant,
  Var,
  Jet,
  Power,
  Exp,
  Sin,
  Cos,
  Sinh,
  Cosh,
  Product,
  Sum,
};

inline bool is_function(Kind k) noexcept {
  return k == Kind::Exp || k == Kind::Sin || k == Kind::Cos || k == Kind::Sinh || k == Kind::Cosh;
}

inline const char* function_name(Kind k) {
  switch (k) {
    case Kind::Exp: return "exp";
    case Kind::Sin: return "sin";
    case Kind::Cos: return "cos";
    case Kind::Sinh: return "sinh";
    case Kind::Cosh: return "cosh";
    default: return "?";
  }
}

/// Spatial derivative orders of a jet variable, one entry per spatial variable.
/// All zeros is u itself.
using JetIndex = std::vector<int>;

inline int jet_order(const JetIndex& j) { return std::accumulate(j.begin(), j.end(), 0); }

class Expr {
 public:
  /// Plain description of a node; `make` turns it into a shared immutable node.
  struct Node {
    Kind kind = Kind::Constant;
    double value = 0.0;
    int index = 0;
    Rational exponent;
    std::vector<Expr> children;
    JetIndex jet;
    std::size_t hash = 0;
    std::size_t size = 1;
    bool canonical = false;
  };

  Expr() : node_(zero_node()) {}

  static Expr constant(double v) {
    if (!std::isfinite(v)) throw DomainEvaluationError("non-finite constant in expression");
    Node n;
    n.kind = Kind::Constant;
    n.value = v == 0.0 ? 0.0 : v;  // no negative zero
    n.canonical = true;
    return make(std::move(n));
  }
  static Expr var(int index) {
    Node n;
    n.kind = Kind::Var;
    n.index = index;
    n.canonical = true;
    return make(std::move(n));
  }
  static Expr jet(JetIndex orders) {
    Node n;
    n.kind = Kind::Jet;
    n.jet = std::move(orders);
    n.canonical = true;
    return make(std::move(n));
  }
  static Expr sum(std::vector<Expr> terms) { return nary(Kind::Sum, std::move(terms)); }
  static Expr product(std::vector<Expr> factors) { return nary(Kind::Product, std::move(factors)); }
  static Expr power(Expr base, Rational exponent) {
    Node n;
    n.kind = Kind::Power;
    n.exponent = exponent;
    n.children.push_back(std::move(base));
    return make(std::move(n));
  }
  static Expr function(Kind kind, Expr arg) {
    if (!is_function(kind)) throw Error("not a function kind");
    Node n;
    n.kind = kind;
    n.children.push_back(std::move(arg));
    return make(std::move(n));
  }
  static Expr exp(Expr a) { return function(Kind::Exp, std::move(a)); }
  static Expr sin(Expr a) { return function(Kind::Sin, std::move(a)); }
  static Expr cos(Expr a) { return function(Kind::Cos, std::move(a)); }
  static Expr sinh(Expr a) { return function(Kind::Sinh, std::move(a)); }
  static Expr cosh(Expr a) { return function(Kind::Cosh, std::move(a)); }

  /// Builds a node, computing its hash and size. The simplifier uses this to stamp
  /// results as canonical.
  static Expr make(Node n) {
    std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    switch (n.kind) {
      case Kind::Constant: mix(std::hash<double>{}(n.value)); break;
      case Kind::Var: mix(std::hash<int>{}(n.index)); break;
      case Kind::Jet:
        for (int o : n.jet) mix(std::hash<int>{}(o));
        break;
      case Kind::Power:
        mix(std::hash<std::int64_t>{}(n.exponent.num()));
        mix(std::hash<std::int64_t>{}(n.exponent.den()));
        break;
      default: break;
    }
    std::size_t size = 1;
    for (const auto& c : n.children) {
      mix(c.hash());
      size += c.size();
    }
    n.hash = h;
    n.size = size;
    auto stored = std::make_shared<Stored>();
    stored->node = std::move(n);
    return Expr(std::move(stored));
  }

  Kind kind() const noexcept { return node_->node.kind; }
  double value() const noexcept { return node_->node.value; }
  int index() const noexcept { return node_->node.index; }
  const Rational& exponent() const noexcept { return node_->node.exponent; }
  const JetIndex& jet_index() const noexcept { return node_->node.jet; }
  std::span<const Expr> children() const noexcept { return node_->node.children; }
  const Expr& child(std::size_t i = 0) const { return node_->node.children.at(i); }
  std::size_t hash() const noexcept { return node_->node.hash; }
  std::size_t size() const noexcept { return node_->node.size; }
  bool is_canonical() const noexcept { return node_->node.canonical; }
  bool is_expanded() const noexcept { return node_->expanded.load(std::memory_order_relaxed); }
  void mark_expanded() const noexcept { node_->expanded.store(true, std::memory_order_relaxed); }
  bool same_node(const Expr& o) const noexcept { return node_ == o.node_; }

  bool is_constant() const noexcept { return kind() == Kind::Constant; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }
  bool is_zero() const noexcept { return is_constant(0.0); }

 private:
  struct Stored {
    Node node;
    mutable std::atomic<bool> expanded{false};
  };

  explicit Expr(std::shared_ptr<const Stored> s) : node_(std::move(s)) {}

  static std::shared_ptr<const Stored> zero_node() {
    static const std::shared_ptr<const Stored> zero = constant(0.0).node_;
    return zero;
  }

  static Expr nary(Kind kind, std::vector<Expr> children) {
    Node n;
    n.kind = kind;
    n.children = std::move(children);
    return make(std::move(n));
  }

  std::shared_ptr<const Stored> node_;
};

namespace detail {

inline int rank(Kind k) noexcept { return static_cast<int>(k); }

inline int cmp_double(double a, double b) noexcept { return a < b ? -1 : (a > b ? 1 : 0); }

}  // namespace detail

/// Total structural order. Powers sort next to their bases (x < x^2 < y) so sums and
/// products print in a natural monomial order; equal means structurally identical.
inline int compare(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return 0;
  const bool ap = a.kind() == Kind::Power;
  const bool bp = b.kind() == Kind::Power;
  if (ap || bp) {
    const Expr& ba = ap ? a.child() : a;
    const Expr& bb = bp ? b.child() : b;
    if (int c = compare(ba, bb); c != 0) return c;
    const Rational ea = ap ? a.exponent() : Rational(1);
    const Rational eb = bp ? b.exponent() : Rational(1);
    if (int c = compare(ea, eb); c != 0) return c;
    return detail::rank(a.kind()) - detail::rank(b.kind());
  }
  if (a.kind() != b.kind()) return detail::rank(a.kind()) - detail::rank(b.kind());
  switch (a.kind()) {
    case Kind::Constant: return detail::cmp_double(a.value(), b.value());
    case Kind::Var: return a.index() - b.index();
    case Kind::Jet: {
      const auto& x = a.jet_index();
      const auto& y = b.jet_index();
      if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) return x[i] < y[i] ? -1 : 1;
      }
      return 0;
    }
    default: break;
  }
  auto ca = a.children();
  auto cb = b.children();
  const std::size_t n = std::min(ca.size(), cb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(ca[i], cb[i]); c != 0) return c;
  }
  if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
  return 0;
}

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.same_node(b)) return true;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  return compare(a, b) == 0;
}

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

inline bool contains_kind(const Expr& e, Kind k) {
  if (e.kind() == k) return true;
  for (const auto& c : e.children()) {
    if (contains_kind(c, k)) return true;
  }
  return false;
}

/// Largest variable index referenced plus one.
inline int variable_extent(const Expr& e) {
  int out = e.kind() == Kind::Var ? e.index() + 1 : 0;
  for (const auto& c : e.children()) out = std::max(out, variable_extent(c));
  return out;
}

/// Collects the bases of fractional powers; these must stay positive for real evaluation.
inline void fractional_power_bases(const Expr& e, std::vector<Expr>& out) {
  if (e.kind() == Kind::Power && !e.exponent().is_integer()) out.push_back(e.child());
  for (const auto& c : e.children()) fractional_power_bases(c, out);
}

}  // namespace rcas::spatial
