#pragma once

// The series driver: leading term from the initial data, then
// u_{n+1} = O^{-1}[Abar_n] with the revised Adomian polynomials, stopping early
// once a polynomial is certified zero.

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcas/adomian.hpp"
#include "rcas/operator.hpp"
#include "rcas/separable.hpp"
#include "rcas/spatial/sample_plan.hpp"

namespace rcas {

inline constexpr int kDefaultNMax = 6;

struct Tolerances {
  double zero = spatial::kDefaultZeroTol;  // certification of vanishing polynomials
  double prune = kDefaultPruneTol;         // dropping negligible keys
  std::size_t term_budget = kDefaultTermBudget;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct ProblemSpec {
  LinearOperatorSpec op;
  JetPolynomial nonlinearity;
  SeparableFunction source;
  InitialData init;
  int dim = 1;
  spatial::Box domain;
  double horizon = 1.0;
  std::optional<SeparableFunction> exact;
  Tolerances tolerances;

  void validate() const {
    op.validate();
    if (dim < 1) throw ConfigError("dimension must be at least 1");
    if (static_cast<int>(domain.size()) != dim) {
      throw ConfigError("domain has " + std::to_string(domain.size()) + " intervals for " +
                        std::to_string(dim) + " variables");
    }
    if (!(horizon > op.base_time)) throw ConfigError("horizon must exceed the base time");
    if (source.dim() != dim) throw ConfigError("source dimension mismatch");
    if (nonlinearity.dim() != dim && !nonlinearity.is_zero()) {
      throw ConfigError("nonlinearity dimension mismatch");
    }
    if (exact && exact->dim() != dim) throw ConfigError("exact solution dimension mismatch");
  }

  /// Halton plan over the domain restricted to where fractional-power bases in the
  /// data are positive, with Chebyshev time samples on [a, T].
  spatial::SamplePlan make_plan() const {
    std::vector<Expr> bases;
    spatial::fractional_power_bases(init.a0, bases);
    if (init.a1) spatial::fractional_power_bases(*init.a1, bases);
    for (const auto& t : source.terms()) {
      spatial::fractional_power_bases(t.coeff.re, bases);
      spatial::fractional_power_bases(t.coeff.im, bases);
    }
    if (exact) {
      for (const auto& t : exact->terms()) {
        spatial::fractional_power_bases(t.coeff.re, bases);
        spatial::fractional_power_bases(t.coeff.im, bases);
      }
    }
    spatial::SamplePlan plan =
        spatial::make_plan(domain, bases, spatial::kPlanPoints, tolerances.zero);
    plan.times = spatial::chebyshev_nodes(op.base_time, horizon, spatial::kTimeSamples);
    return plan;
  }
};

struct StepDiagnostics {
  int index = 0;            // correction index n of u_n
  std::size_t keys = 0;     // time keys in u_n
  std::size_t nodes = 0;    // expression nodes in u_n
  std::size_t adomian_keys = 0;  // keys in the polynomial that produced u_n
  std::size_t pruned = 0;   // keys dropped by pruning
  double seconds = 0.0;
};

struct SeriesSolution {
  std::vector<SeparableFunction> corrections;
  std::vector<SeparableFunction> adomian;  // Abar_0 .. Abar_{n-1}
  std::optional<int> vanished_at;
  std::vector<StepDiagnostics> diagnostics;
  spatial::SamplePlan plan;

  int highest() const { return static_cast<int>(corrections.size()) - 1; }

  friend bool operator==(const SeriesSolution& a, const SeriesSolution& b) {
    return a.corrections == b.corrections && a.vanished_at == b.vanished_at;
  }
};

inline SeparableFunction partial_sum(const SeriesSolution& sol, int n) {
  if (n < 0 || n > sol.highest()) {
    throw Error("partial sum index " + std::to_string(n) + " outside 0.." +
                std::to_string(sol.highest()));
  }
  return sf_sum(std::span<const SeparableFunction>(sol.corrections.data(),
                                                   static_cast<std::size_t>(n) + 1),
                sol.corrections[0].dim(), sol.corrections[0].budget());
}

inline SeriesSolution solve(const ProblemSpec& p, int n_max = kDefaultNMax) {
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  p.validate();
  using clock = std::chrono::steady_clock;
  SeriesSolution sol;
  sol.plan = p.make_plan();
  const double prune_tol = p.tolerances.prune;

  auto start = clock::now();
  const SeparableFunction source = p.source.with_budget(p.tolerances.term_budget);
  SeparableFunction u0 = op_leading_term(p.op, p.init, source);
  sol.plan.scale = sf_max_abs(u0, sol.plan);
  SeparableFunction u0p = sf_prune(u0, sol.plan, prune_tol);
  sol.diagnostics.push_back({0, u0p.size(), u0p.node_count(), 0, u0.size() - u0p.size(),
                             std::chrono::duration<double>(clock::now() - start).count()});
  sol.corrections.push_back(std::move(u0p));

  RevisedAdomian gen(p.nonlinearity, &sol.plan);
  for (int n = 0; n < n_max; ++n) {
    start = clock::now();
    try {
      SeparableFunction abar = gen.next(sol.corrections.back());
      sol.adomian.push_back(abar);
      if (sf_is_zero(abar, sol.plan)) {
        sol.vanished_at = n + 1;
        for (int k = n + 1; k <= n_max; ++k) {
          sol.corrections.emplace_back(p.dim, p.tolerances.term_budget);
          sol.diagnostics.push_back({k, 0, 0, abar.size(), 0, 0.0});
        }
        break;
      }
      SeparableFunction raw = op_inverse_apply(p.op, abar);
      SeparableFunction next = sf_prune(raw, sol.plan, prune_tol);
      sol.diagnostics.push_back({n + 1, next.size(), next.node_count(), abar.size(),
                                 raw.size() - next.size(),
                                 std::chrono::duration<double>(clock::now() - start).count()});
      sol.corrections.push_back(std::move(next));
    } catch (const TermBudgetExceeded& e) {
      throw e.at_step(n + 1);
    }
  }
  return sol;
}

/// O[f] - N[f] - S: the defect of f in the equation.
inline SeparableFunction residual(const ProblemSpec& p, const SeparableFunction& f) {
  return sf_sub(sf_sub(op_apply(p.op, f), jet_eval(p.nonlinearity, f)), p.source);
}

}  // namespace rcas
