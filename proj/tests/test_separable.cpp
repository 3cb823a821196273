#include <gtest/gtest.h>

#include <cmath>

#include "rcas/separable.hpp"
#include "rcas/spatial/print.hpp"
#include "rcas/time_expr.hpp"
#include "support.hpp"

namespace {

using namespace rcas;
using rcas::testing::Gen;
using rcas::testing::parse;
using rcas::testing::sep;
using rcas::testing::unit_plan;

const Complex I{0.0, 1.0};

SeparableFunction keyed(const std::string& spatial_text, int power, Complex exponent,
                        std::vector<std::string> vars = {"x"}) {
  const int dim = static_cast<int>(vars.size());
  return SeparableFunction::product(parse(spatial_text, std::move(vars)),
                                    timealg::ExpPoly::monomial(1.0, power, exponent), dim);
}

TEST(SeparableAdd, ZeroIsNeutral) {
  const SeparableFunction f = sep("x^2*exp(t)");
  EXPECT_EQ(sf_add(f, SeparableFunction(1)), f);
}

TEST(SeparableAdd, ConjugatePairEvaluatesToCosine) {
  const SeparableFunction f = sf_add(keyed("x^2", 0, I), keyed("x^2", 0, -I));
  EXPECT_NEAR(sf_eval(f, {2.0}, M_PI), -8.0, 1e-13);
}

TEST(SeparableAdd, CancellationLeavesNoKeys) {
  const SeparableFunction f = sep("exp(-x)*exp(t)");
  const SeparableFunction g = sep("-exp(-x)*exp(t)");
  EXPECT_TRUE(sf_add(f, g).is_zero());
  EXPECT_TRUE(sf_is_zero(sf_add(f, g), unit_plan()));
}

TEST(SeparableMul, ZeroAbsorbs) {
  EXPECT_TRUE(sf_mul(sep("x*exp(t)"), SeparableFunction(1)).is_zero());
}

TEST(SeparableMul, OneTermSquare) {
  const SeparableFunction f = sep("exp(-x)*exp(t)");
  const SeparableFunction sq = sf_mul(f, f);
  ASSERT_EQ(sq.size(), 1u);
  EXPECT_EQ(sq.terms()[0].key.exponent, Complex(2.0));
  EXPECT_EQ(sq.terms()[0].coeff.re, parse("exp(-2*x)"));
}

TEST(SeparableMul, SquaredSineThroughComplexKeys) {
  const SeparableFunction f = sep("x^2*sin(t)");
  EXPECT_EQ(f.size(), 2u);
  const SeparableFunction sq = sf_mul(f, f);
  const Complex v = sf_eval_complex(sq, std::vector<double>{1.0}, M_PI / 2);
  EXPECT_NEAR(v.real(), 1.0, 1e-13);
  EXPECT_LE(std::abs(v.imag()), 1e-12);
}

TEST(SeparableDiff, SpatialDerivativeOfTimeOnlyFunction) {
  EXPECT_TRUE(sf_diff_x(sep("exp(t)*t"), 0).is_zero());
}

TEST(SeparableDiff, TimeDerivative) {
  const SeparableFunction d = sf_diff_t(sep("x^2*t"));
  EXPECT_EQ(d, sep("x^2"));
}

TEST(SeparableDiff, SpatialDerivativeMatchesFiniteDifferences) {
  const std::vector<std::string> xy{"x", "y"};
  const SeparableFunction f = sep("exp(x*y)*(sin(t) + cos(t))", xy);
  const SeparableFunction d = sf_diff_x(f, 0);
  const SeparableFunction expected = sep("y*exp(x*y)*(sin(t) + cos(t))", xy);
  const spatial::SamplePlan plan = unit_plan(2);
  EXPECT_LE(sf_max_abs(sf_sub(d, expected), plan), 1e-12);
  for (const auto& p : plan.points) {
    for (double t : {0.2, 0.9}) {
      const double h = 1e-6;
      const double fd =
          (sf_eval(f, {p[0] + h, p[1]}, t) - sf_eval(f, {p[0] - h, p[1]}, t)) / (2.0 * h);
      EXPECT_NEAR(sf_eval(d, p, t), fd, 1e-7 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(SeparableEval, Examples) {
  EXPECT_EQ(sf_eval(SeparableFunction(1), {0.3}, 0.7), 0.0);
  EXPECT_NEAR(sf_eval(sep("exp(t - x)"), {1.0}, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(sf_eval(sep("x^2*sin(t)"), {2.0}, M_PI / 6), 2.0, 1e-14);
}

TEST(SeparableEval, UnpairedComplexKeyFailsRealnessCheck) {
  const SeparableFunction f = keyed("1", 0, I);
  EXPECT_THROW(sf_eval(f, {0.0}, 1.0), ToleranceViolation);
}

TEST(SeparablePrune, AllZeroCoefficients) {
  TermAccumulator acc(1);
  acc.add({0, 1.0}, {Expr::constant(0.0), Expr::constant(0.0)});
  EXPECT_TRUE(sf_prune(acc.finish(), unit_plan()).is_zero());
}

TEST(SeparablePrune, IdentityCoefficientIsDropped) {
  TermAccumulator acc(1);
  acc.add({0, 1.0}, {parse("sin(x)^2 + cos(x)^2 - 1"), Expr::constant(0.0)});
  const SeparableFunction f = acc.finish();
  EXPECT_FALSE(f.is_zero());
  EXPECT_TRUE(sf_prune(f, unit_plan()).is_zero());
}

TEST(SeparablePrune, NonzeroSurvives) {
  const SeparableFunction f = keyed("x", 0, 1.0);
  EXPECT_EQ(sf_prune(f, unit_plan()), f);
}

TEST(SeparableBudget, ExceedingBudgetIsAnError) {
  TermAccumulator acc(1, 3);
  for (int k = 0; k < 4; ++k) acc.add({k, 0.0}, {Expr::var(0), Expr::constant(0.0)});
  EXPECT_THROW(acc.finish(), TermBudgetExceeded);
}

TEST(TimeExpressions, HyperbolicAndTrigSplitIntoKeys) {
  const SeparableFunction f = sep("cosh(2*t)*x + sin(x + 3*t)");
  const spatial::SamplePlan plan = unit_plan();
  for (const auto& p : plan.points) {
    for (double t : plan.times) {
      EXPECT_NEAR(sf_eval(f, p, t), std::cosh(2 * t) * p[0] + std::sin(p[0] + 3 * t), 1e-13);
    }
  }
}

TEST(TimeExpressions, NonSeparableTimeDependenceIsRejected) {
  EXPECT_THROW(sep("exp(x*t)"), ConfigError);
  EXPECT_THROW(sep("t^(1/2)"), ConfigError);
}

TEST(TimeExpressions, DisplayUsesRealFunctions) {
  spatial::PrintOptions opt;
  opt.variables = {"x", "t"};
  EXPECT_EQ(spatial::sx_print(to_display(sep("x^2*sin(t)")), opt), "x^2*sin(t)");
  EXPECT_EQ(spatial::sx_print(to_display(sep("exp(t - x)")), opt), "exp(t - x)");
  const std::string hyper = spatial::sx_print(to_display(sep("cosh(t)*x")), opt);
  EXPECT_NE(hyper.find("cosh(t)"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Properties

TEST(SeparableProperty, EvaluationIsAHomomorphism) {
  Gen g(21);
  for (int trial = 0; trial < 20; ++trial) {
    const SeparableFunction a = g.separable(2, g.integer(1, 3), 1.5, 2);
    const SeparableFunction b = g.separable(2, g.integer(1, 3), 1.5, 2);
    const SeparableFunction prod = sf_mul(a, b);
    const SeparableFunction sum = sf_add(a, b);
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> p{g.uniform(-1.0, 1.0), g.uniform(-1.0, 1.0)};
      const double t = g.uniform(0.0, 1.0);
      const double va = sf_eval(a, p, t);
      const double vb = sf_eval(b, p, t);
      EXPECT_LE(std::abs(sf_eval(prod, p, t) - va * vb), 1e-10 * (1.0 + std::abs(va * vb)));
      EXPECT_LE(std::abs(sf_eval(sum, p, t) - (va + vb)),
                1e-10 * (1.0 + std::abs(va) + std::abs(vb)));
    }
  }
}

TEST(SeparableProperty, MixedPartialsCommute) {
  Gen g(22);
  const spatial::SamplePlan plan = unit_plan(2);
  for (int trial = 0; trial < 20; ++trial) {
    const SeparableFunction f = g.separable(2, 3, 1.5, 2);
    const int var = g.integer(0, 1);
    const SeparableFunction a = sf_prune(sf_diff_x(sf_diff_t(f), var), plan);
    const SeparableFunction b = sf_prune(sf_diff_t(sf_diff_x(f, var)), plan);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_TRUE(timealg::same_key(a.terms()[i].key, b.terms()[i].key));
    }
    EXPECT_LE(sf_max_abs(sf_sub(a, b), plan), 1e-12);
  }
}

TEST(SeparableProperty, PruningNeverChangesValues) {
  Gen g(23);
  const spatial::SamplePlan plan = unit_plan(2);
  for (int trial = 0; trial < 20; ++trial) {
    SeparableFunction f = g.separable(2, 3, 1.5, 2);
    // Add keys that carry only roundoff so the pruner has something to remove.
    TermAccumulator noise(2);
    noise.add_scaled({1, {0.3, 0.0}}, 1e-17, {Expr::var(0), Expr::constant(0.0)});
    f = sf_add(f, noise.finish());
    const SeparableFunction p = sf_prune(f, plan);
    for (const auto& pt : plan.points) {
      for (double t : plan.times) {
        const double v = sf_eval(f, pt, t);
        EXPECT_LE(std::abs(sf_eval(p, pt, t) - v), 1e-9 * (1.0 + std::abs(v)));
      }
    }
  }
}

}  // namespace
