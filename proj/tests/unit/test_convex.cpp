#include <gtest/gtest.h>

#include <cmath>

#include "cfmimo/convex.hpp"

using namespace cfmimo;

namespace {

// maximize ln(1 + x0) subject to x0 - c x1 <= 0 and x1^2 <= P.
ConvexProgram scalar_toy(double c, double p) {
  ConvexProgram prog;
  prog.num_vars = 2;
  prog.log_vars = {0};
  prog.constraints.push_back({{}, {{0, 1.0}, {1, -c}}, 0.0, "sinr"});
  prog.constraints.push_back({{{1, 1.0}}, {}, p, "power"});
  return prog;
}

RVector vec(std::initializer_list<double> v) {
  RVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

TEST(Constraint, ValueAndFeasibility) {
  const ConvexProgram prog = scalar_toy(2.0, 4.0);
  const RVector x = vec({1.0, 1.0});
  EXPECT_DOUBLE_EQ(prog.constraints[0].value(x), -1.0);
  EXPECT_DOUBLE_EQ(prog.constraints[1].value(x), -3.0);
  EXPECT_DOUBLE_EQ(prog.max_violation(x), -1.0);
  EXPECT_TRUE(prog.strictly_feasible(x));
  EXPECT_FALSE(prog.strictly_feasible(vec({2.0, 1.0})));
  EXPECT_NEAR(prog.objective(x), std::log(2.0), 1e-15);
}

TEST(SolveConvex, ScalarToyClosedForm) {
  const double c = 3.0, p = 2.0;
  const SolveResult r = solve_convex(scalar_toy(c, p), vec({0.1, 0.5}));
  ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
  EXPECT_NEAR(r.x(1), std::sqrt(p), 1e-6);
  EXPECT_NEAR(r.x(0), c * std::sqrt(p), 1e-6);
  EXPECT_LE(r.gap, 1e-8);
}

TEST(SolveConvex, PhaseOneFromInfeasibleStart) {
  const SolveResult r = solve_convex(scalar_toy(1.0, 1.0), vec({5.0, 3.0}));
  ASSERT_EQ(r.status, SolveStatus::kOptimal) << r.message;
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
}

TEST(SolveConvex, ContradictoryFloorIsInfeasible) {
  ConvexProgram prog = scalar_toy(1.0, 1.0);
  prog.constraints.push_back({{}, {{0, -1.0}}, -2.0, "floor"});  // x0 >= 2 > c sqrt(P)
  const SolveResult r = solve_convex(prog, vec({0.0, 0.5}));
  EXPECT_EQ(r.status, SolveStatus::kInfeasible);
  EXPECT_GT(r.infeasibility, 0.0);
}

TEST(SolveConvex, UnboundedObjective) {
  ConvexProgram prog;
  prog.num_vars = 1;
  prog.log_vars = {0};
  prog.constraints.push_back({{}, {{0, -1.0}}, 0.0, "sign"});
  const SolveResult r = solve_convex(prog, vec({1.0}));
  EXPECT_EQ(r.status, SolveStatus::kUnbounded);
}

TEST(SolveConvex, SymmetricWaterFilling) {
  // maximize ln(1+x) + ln(1+y) s.t. x + y <= 2 and x^2 + y^2 <= 8.
  ConvexProgram prog;
  prog.num_vars = 2;
  prog.log_vars = {0, 1};
  prog.constraints.push_back({{}, {{0, 1.0}, {1, 1.0}}, 2.0, "sum"});
  prog.constraints.push_back({{{0, 1.0}, {1, 1.0}}, {}, 8.0, "ball"});
  const SolveResult r = solve_convex(prog, vec({0.0, 0.0}));
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(1), 1.0, 1e-6);
  EXPECT_NEAR(r.objective, 2.0 * std::log(2.0), 1e-8);
}

TEST(SolveConvex, BadlyScaledRowsAreNormalized) {
  // Same toy with coefficients spanning many decades.
  ConvexProgram prog;
  prog.num_vars = 2;
  prog.log_vars = {0};
  prog.constraints.push_back({{}, {{0, 1e-12}, {1, -3e-12}}, 0.0, "sinr"});
  prog.constraints.push_back({{{1, 1e9}}, {}, 2e9, "power"});
  const SolveResult r = solve_convex(prog, vec({0.1, 0.5}));
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_NEAR(r.x(0), 3.0 * std::sqrt(2.0), 1e-6);
}

TEST(SolveConvex, Deterministic) {
  const ConvexProgram prog = scalar_toy(2.5, 3.0);
  const SolveResult a = solve_convex(prog, vec({0.2, 0.2}));
  const SolveResult b = solve_convex(prog, vec({0.2, 0.2}));
  EXPECT_LE((a.x - b.x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(a.newton_steps, b.newton_steps);
}

TEST(SolveConvex, FeasibilityOnlyProgramReturnsInteriorPoint) {
  ConvexProgram prog;
  prog.num_vars = 2;
  prog.constraints.push_back({{}, {{0, 1.0}, {1, 1.0}}, 1.0, "sum"});
  prog.constraints.push_back({{}, {{0, -1.0}}, 0.0, "x"});
  prog.constraints.push_back({{}, {{1, -1.0}}, 0.0, "y"});
  const SolveResult r = solve_convex(prog, vec({2.0, 2.0}));
  EXPECT_NE(r.status, SolveStatus::kInfeasible);
  EXPECT_TRUE(prog.strictly_feasible(r.x));
}

TEST(SolveConvex, RejectsWrongStartDimension) {
  EXPECT_THROW(solve_convex(scalar_toy(1.0, 1.0), vec({1.0})), Error);
}

TEST(SolveStatusNames, AllNamed) {
  EXPECT_STREQ(to_string(SolveStatus::kOptimal), "optimal");
  EXPECT_STREQ(to_string(SolveStatus::kInfeasible), "infeasible");
  EXPECT_STREQ(to_string(SolveStatus::kUnbounded), "unbounded");
  EXPECT_STREQ(to_string(SolveStatus::kStalled), "stalled");
}
