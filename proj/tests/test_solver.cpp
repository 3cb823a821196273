#include <gtest/gtest.h>

#include <cmath>

#include "rcas/config.hpp"
#include "rcas/solver.hpp"
#include "support.hpp"

namespace {

using namespace rcas;
using rcas::testing::Gen;
using rcas::testing::sep;

BuiltProblem packaged(const std::string& name) {
  return build_problem(load_config(std::string(RCAS_CONFIG_DIR) + "/" + name + ".cfg"));
}

const std::vector<std::string>& all_packaged() {
  static const std::vector<std::string> names{"example1", "example2", "example3", "example4",
                                              "example5", "example6", "adm-example5",
                                              "contractive"};
  return names;
}

/// Plan points crossed with a fixed set of times inside the horizon.
double max_on(const SeparableFunction& f, const spatial::SamplePlan& plan,
              const std::vector<double>& ts) {
  double m = 0.0;
  for (const auto& p : plan.points) {
    for (double t : ts) m = std::max(m, std::abs(sf_eval(f, p, t)));
  }
  return m;
}

TEST(Solve, GasDynamicsStopsAfterLeadingTerm) {
  const BuiltProblem bp = packaged("example1");
  const SeriesSolution sol = solve(bp.spec, bp.n_max);
  ASSERT_TRUE(sol.vanished_at.has_value());
  EXPECT_EQ(*sol.vanished_at, 1);
  EXPECT_EQ(sol.highest(), bp.n_max);
  EXPECT_LE(sf_max_abs(sf_sub(sol.corrections[0], sep("exp(t - x)")), sol.plan), 1e-13);
  for (int k = 1; k <= sol.highest(); ++k) EXPECT_TRUE(sol.corrections[k].is_zero());
}

TEST(Solve, ZeroOrderSolveReturnsOnlyLeadingTerm) {
  const BuiltProblem bp = packaged("example2");
  const SeriesSolution sol = solve(bp.spec, 0);
  EXPECT_EQ(sol.highest(), 0);
  EXPECT_TRUE(sol.adomian.empty());
  EXPECT_THROW(solve(bp.spec, -1), ConfigError);
}

TEST(Solve, AdmStartProducesAlternatingSeries) {
  const BuiltProblem bp = packaged("adm-example5");
  const SeriesSolution sol = solve(bp.spec, 3);
  const spatial::SamplePlan& plan = sol.plan;
  EXPECT_LE(sf_max_abs(sf_sub(sol.corrections[0], sep("t*x^2")), plan), 1e-12);
  EXPECT_LE(sf_max_abs(sf_sub(sol.corrections[1], sep("-t^3/6*x^2")), plan), 1e-12);
  EXPECT_LE(sf_max_abs(sf_sub(sol.corrections[2], sep("t^5/120*x^2")), plan), 1e-12);
}

TEST(Solve, SecondCorrectionOfTableProblemMatchesClosedForm) {
  const BuiltProblem bp = packaged("example2");
  const SeriesSolution sol = solve(bp.spec, 1);
  const double a = 0.5, b = 0.7, c1 = 0.4, B1 = 0.9, B2 = 0.5;
  const double s6 = std::sqrt(6.0);
  auto closed = [&](double x, double t) {
    const double E = std::exp(std::sqrt(b) * t);
    const double X = (c1 + x) * (c1 + x);
    const double p = 2 * E - 6 * E * E + std::pow(E, 4) + 1;
    const double inner = std::pow(E, -3) * (-6 * a * B1 * p -
                                            2 * s6 * a * B2 * (2 * E + std::pow(E, 4) - 1) +
                                            3 * b * p * X) -
                         12 * a * B1 + 4 * s6 * a * B2 + 6 * b * X;
    return E * inner / (216 * a);
  };
  Gen g(51);
  for (int k = 0; k < 10; ++k) {
    const double x = g.uniform(-5.0, 5.0);
    const double t = g.uniform(0.0, 1.0);
    const double want = closed(x, t);
    EXPECT_NEAR(sf_eval(sol.corrections[1], {x}, t), want, 1e-9 * (1.0 + std::abs(want)))
        << "x=" << x << " t=" << t;
  }
  // u_1 and its time derivative vanish at t = 0, so u_1 starts like A_0(x, 0) t^2 / 2
  // with A_0(x, 0) = b^2 (c1 + x)^2 / (6a) - b B1 / 3.
  for (double x : {-5.0, 0.0, 3.5}) {
    EXPECT_NEAR(sf_eval(sol.corrections[1], {x}, 0.0), 0.0, 1e-13);
    EXPECT_NEAR(sf_eval(sf_diff_t(sol.corrections[1]), {x}, 0.0), 0.0, 1e-13);
    const double a0 = b * b * (c1 + x) * (c1 + x) / (6 * a) - b * B1 / 3;
    const double h = 1e-3;
    EXPECT_NEAR(sf_eval(sol.corrections[1], {x}, h), a0 * h * h / 2, h * h * h);
  }
}

TEST(Residual, ExactSolutionOfFifthOrderProblemHasNoDefect) {
  const BuiltProblem bp = packaged("example4");
  const SeriesSolution sol = solve(bp.spec, 0);
  ASSERT_TRUE(bp.spec.exact.has_value());
  EXPECT_TRUE(sf_is_zero(residual(bp.spec, *bp.spec.exact), sol.plan));
}

TEST(Residual, TableProblemDefectShrinksWithOrder) {
  const BuiltProblem bp = packaged("example2");
  const SeriesSolution sol = solve(bp.spec, 5);
  const std::vector<double> ts{0.1, 0.5, 1.0};
  const double r1 = max_on(residual(bp.spec, partial_sum(sol, 1)), sol.plan, ts);
  const double r3 = max_on(residual(bp.spec, partial_sum(sol, 3)), sol.plan, ts);
  const double r5 = max_on(residual(bp.spec, partial_sum(sol, 5)), sol.plan, ts);
  EXPECT_GT(r1, r3);
  EXPECT_GT(r3, r5);
}

TEST(Solve, TermBudgetFailureReportsTheStep) {
  BuiltProblem bp = packaged("example2");
  bp.spec.tolerances.term_budget = 4;
  try {
    solve(bp.spec, 5);
    FAIL() << "expected a term budget failure";
  } catch (const TermBudgetExceeded& e) {
    EXPECT_GE(e.step(), 1);
    EXPECT_EQ(e.budget(), 4u);
    EXPECT_NE(std::string(e.what()).find("at correction"), std::string::npos);
  }
}

TEST(Solve, PartialSumRangeIsChecked) {
  const BuiltProblem bp = packaged("example1");
  const SeriesSolution sol = solve(bp.spec, 2);
  EXPECT_THROW(partial_sum(sol, 3), Error);
  EXPECT_THROW(partial_sum(sol, -1), Error);
}

// ---------------------------------------------------------------------------
// Invariants over every packaged problem

class PackagedProblem : public ::testing::TestWithParam<std::string> {};

TEST_P(PackagedProblem, CorrectionsStartAtRest) {
  const BuiltProblem bp = packaged(GetParam());
  const SeriesSolution sol = solve(bp.spec, std::min(bp.n_max, 3));
  const double a = bp.spec.op.base_time;
  for (int k = 1; k <= sol.highest(); ++k) {
    const SeparableFunction& u = sol.corrections[k];
    const SeparableFunction ut = sf_diff_t(u);
    const double scale = 1.0 + sf_max_abs(u, sol.plan);
    for (const auto& p : sol.plan.points) {
      EXPECT_LE(std::abs(sf_eval(u, p, a)), 1e-12 * scale) << "u_" << k;
      if (bp.spec.op.order == 2) {
        EXPECT_LE(std::abs(sf_eval(ut, p, a)), 1e-11 * scale);
      }
    }
  }
}

TEST_P(PackagedProblem, EarlyStopIsSound) {
  const BuiltProblem bp = packaged(GetParam());
  const SeriesSolution sol = solve(bp.spec, std::min(bp.n_max, 3));
  if (!sol.vanished_at) GTEST_SKIP() << "series does not terminate";
  const SeparableFunction s = partial_sum(sol, *sol.vanished_at - 1);
  EXPECT_TRUE(sf_is_zero(residual(bp.spec, s), sol.plan));
}

TEST_P(PackagedProblem, PartialSumsTelescope) {
  const BuiltProblem bp = packaged(GetParam());
  const SeriesSolution sol = solve(bp.spec, std::min(bp.n_max, 3));
  const SeparableFunction& u0 = sol.corrections[0];
  for (int m = 1; m <= static_cast<int>(sol.adomian.size()); ++m) {
    if (sol.vanished_at && m > *sol.vanished_at - 1) break;
    const SeparableFunction sum = sf_sum(
        std::span<const SeparableFunction>(sol.adomian.data(), static_cast<std::size_t>(m)),
        bp.spec.dim, bp.spec.tolerances.term_budget);
    const SeparableFunction rebuilt = sf_add(u0, op_inverse_apply(bp.spec.op, sum));
    const SeparableFunction s = partial_sum(sol, m);
    EXPECT_LE(sf_max_abs(sf_sub(s, rebuilt), sol.plan), 1e-10 * (1.0 + sf_max_abs(s, sol.plan)))
        << "m=" << m;
  }
}

TEST_P(PackagedProblem, SolvingIsDeterministic) {
  const BuiltProblem bp = packaged(GetParam());
  const int n = std::min(bp.n_max, 2);
  EXPECT_EQ(solve(bp.spec, n), solve(bp.spec, n));
}

INSTANTIATE_TEST_SUITE_P(Configs, PackagedProblem, ::testing::ValuesIn(all_packaged()),
                         [](const auto& info) {
                           std::string s = info.param;
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });

}  // namespace
