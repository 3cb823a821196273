#pragma once

// Deterministic sample plans and numeric zero certification.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rcas/spatial/calculus.hpp"

namespace rcas::spatial {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box = std::vector<Interval>;

inline constexpr std::size_t kPlanPoints = 33;
inline constexpr std::size_t kMinPlanPoints = 17;
inline constexpr std::size_t kMinUsablePoints = 9;
inline constexpr std::size_t kTimeSamples = 9;
inline constexpr double kDefaultZeroTol = 1e-10;

/// Radical inverse of `index` in `base`: the Halton coordinate.
inline double radical_inverse(std::size_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

inline unsigned halton_base(std::size_t dim) {
  static constexpr std::array<unsigned, 8> primes{2, 3, 5, 7, 11, 13, 17, 19};
  if (dim >= primes.size()) throw Error("sample plans support at most 8 spatial dimensions");
  return primes[dim];
}

/// Chebyshev-Gauss nodes mapped to [a, b], in increasing order.
inline std::vector<double> chebyshev_nodes(double a, double b, std::size_t count) {
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double theta = std::numbers::pi * (2.0 * static_cast<double>(count - k) - 1.0) /
                         (2.0 * static_cast<double>(count));
    out.push_back(0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta));
  }
  return out;
}

/// Points used to certify that an expression vanishes. `scale` is the magnitude of
/// the solve the plan belongs to; the zero threshold is tol * (1 + scale).
struct SamplePlan {
  std::vector<std::vector<double>> points;
  std::vector<double> times;
  double tol = kDefaultZeroTol;
  double scale = 0.0;

  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }
  double threshold() const { return tol * (1.0 + scale); }
};

/// Halton points inside `box`. When `positive` is non-empty, only points where each of
/// those expressions is strictly positive are kept, scanning further along the
/// sequence until `count` points are found.
inline SamplePlan make_plan(const Box& box, const std::vector<Expr>& positive = {},
                            std::size_t count = kPlanPoints, double tol = kDefaultZeroTol) {
  if (box.empty()) throw Error("sample plan needs at least one spatial dimension");
  for (const auto& iv : box) {
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw Error("domain interval must satisfy lo < hi");
    }
  }
  SamplePlan plan;
  plan.tol = tol;
  const std::size_t scan_limit = positive.empty() ? count : 64 * count;
  for (std::size_t i = 1; i <= scan_limit && plan.points.size() < count; ++i) {
    std::vector<double> p(box.size());
    for (std::size_t d = 0; d < box.size(); ++d) {
      const double u = radical_inverse(i, halton_base(d));
      p[d] = box[d].lo + (box[d].hi - box[d].lo) * u;
    }
    bool ok = true;
    for (const auto& base : positive) {
      try {
        if (!(sx_eval(base, p) > 0.0)) ok = false;
      } catch (const DomainEvaluationError&) {
        ok = false;
      }
      if (!ok) break;
    }
    if (ok) plan.points.push_back(std::move(p));
  }
  if (plan.points.size() < kMinPlanPoints) {
    throw DomainEvaluationError("only " + std::to_string(plan.points.size()) +
                                " sample points keep every fractional-power base positive");
  }
  return plan;
}

/// Certifies numerically that `e` vanishes on the plan. Points where `e` cannot be
/// evaluated are skipped; fewer than nine usable points is inconclusive.
inline bool sx_is_zero(const Expr& e, const SamplePlan& plan) {
  if (e.is_zero()) return true;
  if (e.is_constant()) return std::abs(e.value()) <= plan.threshold();
  std::size_t usable = 0;
  for (const auto& p : plan.points) {
    double v = 0.0;
    try {
      v = sx_eval(e, p);
    } catch (const DomainEvaluationError&) {
      continue;
    }
    ++usable;
    if (!(std::abs(v) <= plan.threshold())) return false;
  }
  if (usable < kMinUsablePoints) {
    throw ZeroTestInconclusive("only " + std::to_string(usable) +
                               " plan points were evaluable for the zero test");
  }
  return true;
}

}  // namespace rcas::spatial
