#include <gtest/gtest.h>

#include <cmath>

#include "rcas/analysis.hpp"
#include "rcas/operator.hpp"
#include "support.hpp"

namespace {

using namespace rcas;
using rcas::testing::Gen;
using rcas::testing::parse;
using rcas::testing::sep;
using rcas::testing::unit_plan;
using rcas::testing::window_plan;

const Complex I{0.0, 1.0};

double max_diff(const SeparableFunction& a, const SeparableFunction& b,
                const spatial::SamplePlan& plan) {
  return sf_max_abs(sf_sub(a, b), plan);
}

/// Homogeneous solution with value v and slope s at time a, evaluated at t.
Complex homogeneous(const LinearOperatorSpec& op, Complex v, Complex s, double t) {
  const double r = t - op.base_time;
  const Complex l1 = op.lambda1;
  if (op.confluent()) return std::exp(l1 * r) * (v + (s - l1 * v) * r);
  // Divided difference (e^{l2 r} - e^{l1 r}) / (l2 - l1) through expm1, accurate for close roots.
  const Complex d = op.lambda2 - l1;
  const Complex dd = std::exp(l1 * r) * rcas::detail::expm1c(d * r) / d;
  return v * std::exp(l1 * r) + (s - l1 * v) * dd;
}

LinearOperatorSpec random_spec(Gen& g, int kind) {
  const double a = g.uniform(0.0, 0.5);
  switch (kind) {
    case 0: return LinearOperatorSpec::second_order(g.uniform(-2, 2), g.uniform(-2, 2), a);
    case 1: {
      const Complex l{g.uniform(-1, 1), g.uniform(0.3, 2)};
      return LinearOperatorSpec::second_order(l, std::conj(l), a);
    }
    case 2: {
      const double l = g.uniform(-2, 2);
      return LinearOperatorSpec::second_order(l, l, a);
    }
    case 3: {
      const double l = g.uniform(-2, 2);
      return LinearOperatorSpec::second_order(l, l + 1e-6, a);
    }
    default: return LinearOperatorSpec::first_order(g.uniform(-2, 2), a);
  }
}

TEST(OperatorApply, ZeroMapsToZero) {
  EXPECT_TRUE(op_apply(LinearOperatorSpec::second_order(1, 2), SeparableFunction(1)).is_zero());
}

TEST(OperatorApply, RootsAnnihilateHomogeneousSolutions) {
  const auto op = LinearOperatorSpec::second_order(1, 2);
  EXPECT_TRUE(op_apply(op, sep("exp(t)")).is_zero());
  EXPECT_TRUE(op_apply(op, sep("exp(2*t)")).is_zero());
}

TEST(OperatorApply, KernelMassFunctionMapsToOne) {
  const auto op = LinearOperatorSpec::second_order(1, 2);
  EXPECT_LE(max_diff(op_apply(op, sep("(exp(2*t) - 2*exp(t) + 1)/2")), sep("1"), unit_plan()),
            1e-14);
}

TEST(OperatorInverse, ZeroMapsToZero) {
  EXPECT_TRUE(op_inverse_apply(LinearOperatorSpec::second_order(1, 2), SeparableFunction(1)).is_zero());
}

TEST(OperatorInverse, InverseOfOneMatchesKernelMass) {
  const auto op = LinearOperatorSpec::second_order(1, 2);
  const SeparableFunction v = op_inverse_apply(op, sep("1"));
  EXPECT_LE(max_diff(v, sep("(exp(2*t) - 2*exp(t) + 1)/2"), unit_plan()), 1e-14);
  for (double t : {0.25, 0.5, 1.0}) {
    EXPECT_NEAR(sf_eval(v, {0.0}, t), kernel_mass(op, t), 1e-13);
  }
}

TEST(OperatorInverse, ExponentialSource) {
  const auto op = LinearOperatorSpec::second_order(1, 2);
  const SeparableFunction v = op_inverse_apply(op, sep("exp(3*t)"));
  EXPECT_LE(max_diff(v, sep("exp(3*t)/2 - exp(2*t) + exp(t)/2"), unit_plan()), 1e-13);
  EXPECT_LE(max_diff(op_apply(op, v), sep("exp(3*t)"), unit_plan()), 1e-13);
  EXPECT_NEAR(sf_eval(v, {0.0}, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(sf_eval(sf_diff_t(v), {0.0}, 0.0), 0.0, 1e-15);
}

TEST(OperatorInverse, ResonantSourceUsesPolynomialBranch) {
  const auto op = LinearOperatorSpec::second_order(1, -1);
  const SeparableFunction v = op_inverse_apply(op, sep("exp(t)"));
  EXPECT_LE(max_diff(op_apply(op, v), sep("exp(t)"), unit_plan()), 1e-14);
  EXPECT_LE(max_diff(v, sep("t*exp(t)/2 - sinh(t)/2"), unit_plan()), 1e-14);
}

TEST(OperatorLeadingTerm, ZeroDataGivesZero) {
  const auto op = LinearOperatorSpec::second_order(1, 2);
  InitialData init{Expr::constant(0.0), Expr::constant(0.0)};
  EXPECT_TRUE(op_leading_term(op, init, SeparableFunction(1)).is_zero());
}

TEST(OperatorLeadingTerm, ConjugateRootsGiveSine) {
  const auto op = LinearOperatorSpec::second_order(I, -I);
  InitialData init{Expr::constant(0.0), parse("x^2")};
  const SeparableFunction u0 = op_leading_term(op, init, SeparableFunction(1));
  EXPECT_LE(max_diff(u0, sep("x^2*sin(t)"), unit_plan()), 1e-15);
}

TEST(OperatorLeadingTerm, OppositeRootsGiveGrowingExponential) {
  const auto op = LinearOperatorSpec::second_order(1, -1);
  InitialData init{parse("exp(x)"), parse("exp(x)")};
  const SeparableFunction u0 = op_leading_term(op, init, SeparableFunction(1));
  EXPECT_EQ(u0.size(), 1u);
  EXPECT_LE(max_diff(u0, sep("exp(x + t)"), unit_plan()), 1e-15);
}

TEST(OperatorLeadingTerm, FirstOrder) {
  const auto op = LinearOperatorSpec::first_order(1.0, 0.5);
  InitialData init{parse("exp(-x)"), std::nullopt};
  const SeparableFunction u0 = op_leading_term(op, init, SeparableFunction(1));
  EXPECT_NEAR(sf_eval(u0, {0.2}, 1.5), std::exp(1.0 - 0.2), 1e-14);
}

TEST(OperatorLeadingTerm, SecondOrderNeedsSlope) {
  InitialData init{Expr::constant(1.0), std::nullopt};
  EXPECT_THROW(op_leading_term(LinearOperatorSpec::second_order(1, 2), init, SeparableFunction(1)),
               ConfigError);
}

TEST(OperatorLeadingTerm, ZeroRootsRecoverPlainTaylorStart) {
  const auto op = LinearOperatorSpec::second_order(0, 0);
  InitialData init{parse("sin(x)"), parse("x^2")};
  const SeparableFunction u0 = op_leading_term(op, init, SeparableFunction(1));
  EXPECT_LE(max_diff(u0, sep("sin(x) + t*x^2"), unit_plan()), 1e-15);
}

TEST(OperatorSpec, FromCoefficients) {
  const auto a = LinearOperatorSpec::from_coefficients(-3.0, 2.0);
  EXPECT_NEAR(std::abs(a.lambda1 - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a.lambda2 - 1.0), 0.0, 1e-15);
  const auto b = LinearOperatorSpec::from_coefficients(0.0, 1.0);
  EXPECT_NEAR(std::abs(b.lambda1 - I), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b.lambda2 + I), 0.0, 1e-15);
  const auto c = LinearOperatorSpec::from_coefficients(2.0, 1.0);
  EXPECT_TRUE(c.confluent());
  const auto d = LinearOperatorSpec::from_coefficients(1e8, 1.0);
  EXPECT_NEAR(d.lambda1.real(), -1e-8, 1e-22);  // no cancellation in the small root
}

TEST(OperatorSpec, Validation) {
  LinearOperatorSpec bad = LinearOperatorSpec::second_order(1, 2);
  bad.order = 3;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(LinearOperatorSpec::second_order(NAN, 1).validate(), ConfigError);
}

// ---------------------------------------------------------------------------
// Properties over random operators and functions

TEST(OperatorProperty, RightInverse) {
  Gen g(31);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearOperatorSpec op = random_spec(g, trial % 5);
    const spatial::SamplePlan plan = window_plan(op.base_time);
    const SeparableFunction f = g.separable(1, g.integer(1, 3), 1.5, 2);
    const SeparableFunction back = op_apply(op, op_inverse_apply(op, f));
    const double scale = 1.0 + sf_max_abs(f, plan);
    EXPECT_LE(max_diff(back, f, plan), 1e-10 * scale) << "trial " << trial;
    // Key-wise: every key of the defect has a negligible coefficient.
    const SeparableFunction defect = sf_sub(back, f);
    for (const auto& term : defect.terms()) {
      for (const auto& p : plan.points) {
        EXPECT_LE(std::abs(term.coeff.eval(p)) * std::abs(timealg::eval_key(term.key, 1.0)),
                  1e-9 * scale);
      }
    }
  }
}

TEST(OperatorProperty, LeftInverseModuloInitialData) {
  Gen g(32);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearOperatorSpec op = random_spec(g, trial % 4);
    const spatial::SamplePlan plan = window_plan(op.base_time);
    const double a = op.base_time;
    const SeparableFunction u = g.separable(1, g.integer(1, 3), 1.5, 2);
    const SeparableFunction lhs = op_inverse_apply(op, op_apply(op, u));
    const SeparableFunction ut = sf_diff_t(u);
    // Roots 1e-6 apart carry coefficients of order 1/delta on two keys, so the
    // achievable accuracy is relative to the size of u rather than pointwise.
    const double scale = 1.0 + sf_max_abs(u, plan);
    for (const auto& p : plan.points) {
      const double v = sf_eval(u, p, a);
      const double s = sf_eval(ut, p, a);
      for (double t : plan.times) {
        const double expected = sf_eval(u, p, t) - homogeneous(op, v, s, t).real();
        EXPECT_NEAR(sf_eval(lhs, p, t), expected, 1e-9 * scale)
            << "trial " << trial;
      }
    }
  }
}

TEST(OperatorProperty, CorrectionsStartAtRest) {
  Gen g(33);
  const spatial::SamplePlan plan = unit_plan();
  for (int trial = 0; trial < 30; ++trial) {
    const LinearOperatorSpec op = random_spec(g, trial % 4);
    const SeparableFunction f = g.separable(1, 2, 1.5, 2);
    const SeparableFunction v = op_inverse_apply(op, f);
    const SeparableFunction vt = sf_diff_t(v);
    const double scale = 1.0 + sf_max_abs(f, plan);
    for (const auto& p : plan.points) {
      EXPECT_NEAR(sf_eval(v, p, op.base_time), 0.0, 1e-9 * scale) << "trial " << trial;
      EXPECT_NEAR(sf_eval(vt, p, op.base_time), 0.0, 1e-9 * scale);
    }
  }
}

TEST(OperatorProperty, LeadingTermCarriesInitialData) {
  Gen g(34);
  const spatial::SamplePlan plan = unit_plan();
  for (int trial = 0; trial < 30; ++trial) {
    const LinearOperatorSpec op = random_spec(g, trial % 4);
    const Expr a0 = g.expr(1, 2);
    const Expr a1 = g.expr(1, 2);
    const SeparableFunction u0 = op_leading_term(op, {a0, a1}, SeparableFunction(1));
    const SeparableFunction u0t = sf_diff_t(u0);
    for (const auto& p : plan.points) {
      const double v = spatial::sx_eval(a0, p);
      const double s = spatial::sx_eval(a1, p);
      const double scale = 1.0 + std::abs(v) + std::abs(s);
      EXPECT_NEAR(sf_eval(u0, p, op.base_time), v, 1e-9 * scale);
      EXPECT_NEAR(sf_eval(u0t, p, op.base_time), s, 1e-9 * scale);
    }
    EXPECT_LE(sf_max_abs(op_apply(op, u0), plan), 1e-10 * (1.0 + sf_max_abs(u0, plan)));
  }
}

TEST(OperatorProperty, NearConfluentRootsApproachConfluentFormula) {
  Gen g(35);
  const spatial::SamplePlan plan = unit_plan();
  for (int trial = 0; trial < 20; ++trial) {
    const double l = g.uniform(-2.0, 2.0);
    const double a = g.uniform(0.0, 0.5);
    const auto confluent = LinearOperatorSpec::second_order(l, l, a);
    const auto split = LinearOperatorSpec::second_order(l, l + 1e-6, a);
    ASSERT_TRUE(confluent.confluent());
    ASSERT_FALSE(split.confluent());
    const SeparableFunction f = g.separable(1, 2, 1.5, 2);
    const InitialData init{g.expr(1, 2), g.expr(1, 2)};
    const SeparableFunction c1 = op_inverse_apply(confluent, f);
    const SeparableFunction s1 = op_inverse_apply(split, f);
    const SeparableFunction c2 = op_leading_term(confluent, init, f);
    const SeparableFunction s2 = op_leading_term(split, init, f);
    // The two operators differ at first order in the split, so the gap is measured
    // against the size of each function over the window rather than pointwise.
    const double scale1 = 1.0 + sf_max_abs(c1, plan);
    const double scale2 = 1.0 + sf_max_abs(c2, plan);
    for (const auto& p : plan.points) {
      for (double t : plan.times) {
        EXPECT_NEAR(sf_eval(s1, p, t), sf_eval(c1, p, t), 1e-6 * scale1) << trial;
        EXPECT_NEAR(sf_eval(s2, p, t), sf_eval(c2, p, t), 1e-6 * scale2) << trial;
      }
    }
  }
}

}  // namespace
