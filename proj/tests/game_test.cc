// Copyright 2026 The Starlit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "game_oracle.h"
#include "starlit/common.h"
#include "starlit/game.h"
#include "starlit/simplex.h"

namespace starlit::game {
namespace {

using starlit::testing::binary_privacy;
using starlit::testing::grid_optimum;

const double kLn3 = std::log(3.0);

Eigen::VectorXd prior2(double p0) {
  Eigen::VectorXd v(2);
  v << p0, 1 - p0;
  return v;
}

ldp::TransformationMatrix constant_columns() {
  Eigen::MatrixXd p(2, 2);
  p << 0.4, 0.6, 0.4, 0.6;
  return ldp::TransformationMatrix(p);
}

TEST(BestResponseTest, IdentityRevealsTruth) {
  auto id = ldp::identity_mechanism(2);
  for (int v = 0; v < 2; ++v) EXPECT_EQ(adversary_best_response(id, prior2(0.9), hamming_metric(2), v), v);
}

TEST(BestResponseTest, UninformativeChannelGuessesPriorMode) {
  for (int v = 0; v < 2; ++v) {
    EXPECT_EQ(adversary_best_response(constant_columns(), prior2(0.7), hamming_metric(2), v), 0);
  }
}

TEST(BestResponseTest, RrUniformPrior) {
  EXPECT_EQ(adversary_best_response(ldp::rr_matrix(kLn3), prior2(0.5), hamming_metric(2), 1), 1);
}

TEST(BestResponseTest, ZeroProbabilityObservation) {
  Eigen::VectorXd p(2);
  p << 1.0, 0.0;
  EXPECT_THROW(adversary_best_response(ldp::identity_mechanism(2), p, hamming_metric(2), 1),
               ConfigError);
}

TEST(ExpectedPrivacyTest, HandValues) {
  EXPECT_EQ(expected_privacy(ldp::identity_mechanism(2), prior2(0.3), hamming_metric(2)), 0.0);
  EXPECT_NEAR(expected_privacy(ldp::rr_matrix(0.0), prior2(0.5), hamming_metric(2)), 0.5, 1e-15);
  EXPECT_NEAR(expected_privacy(ldp::rr_matrix(kLn3), prior2(0.5), hamming_metric(2)), 0.25, 1e-15);
}

TEST(ExpectedPrivacyTest, MatchesIndependentBinaryFormula) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    double p = u(rng), q = u(rng), pi0 = u(rng);
    Eigen::MatrixXd f(2, 2);
    f << 1 - p, p, q, 1 - q;
    EXPECT_NEAR(expected_privacy(ldp::TransformationMatrix(f), prior2(pi0), hamming_metric(2)),
                binary_privacy(p, q, pi0, 1 - pi0), 1e-12);
  }
}

TEST(BuildLpTest, BinaryFamilyCounts) {
  auto spec = GameSpec::with_hamming(prior2(0.5), 1.0);
  auto lp = build_lp(spec);
  EXPECT_EQ(lp.num_variables(), 6);
  EXPECT_EQ(lp.count_ub("privacy"), 4u);
  EXPECT_EQ(lp.count_ub("cap"), 4u);
  EXPECT_EQ(lp.count_eq("stochastic"), 2u);
  EXPECT_EQ(lp.count_ub("dp"), 4u);
}

TEST(BuildLpTest, InfiniteEpsilonDropsDp) {
  auto lp = build_lp(GameSpec::with_hamming(prior2(0.5), ldp::kInfinity));
  EXPECT_EQ(lp.count_ub("dp"), 0u);
  EXPECT_EQ(lp.count_ub("cap"), 4u);
}

TEST(BuildLpTest, LargerAlphabet) {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 1.0 / 3);
  auto lp = build_lp(GameSpec::with_hamming(p, 1.0));
  EXPECT_EQ(lp.num_variables(), 12);
  EXPECT_EQ(lp.count_ub("privacy"), 9u);
  EXPECT_EQ(lp.count_ub("dp"), 18u);
}

TEST(SolveTest, ZeroEpsilon) {
  auto sol = solve_optimal_mechanism(GameSpec::with_hamming(prior2(0.5), 0.0));
  EXPECT_NEAR(sol.expected_privacy, 0.5, 1e-9);
}

TEST(SolveTest, CapsFreeReachesOneMinusMaxPrior) {
  for (double eps : {0.0, 0.5, 2.0, 10.0, ldp::kInfinity}) {
    auto sol = solve_optimal_mechanism(GameSpec::with_hamming(prior2(0.7), eps));
    EXPECT_NEAR(sol.expected_privacy, 0.3, 1e-9) << eps;
  }
}

TEST(SolveTest, SymmetricQuarterCaps) {
  auto spec = GameSpec::with_hamming(prior2(0.5), kLn3);
  spec.caps(0, 1) = spec.caps(1, 0) = 0.25;
  auto sol = solve_optimal_mechanism(spec);
  EXPECT_NEAR(sol.expected_privacy, 0.25, 1e-9);
  EXPECT_NEAR(sol.mechanism(0, 1), 0.25, 1e-9);
  EXPECT_NEAR(sol.mechanism(1, 0), 0.25, 1e-9);
  auto grid = grid_optimum(spec, 1e-3);
  EXPECT_NEAR(grid.privacy, 0.25, 1e-9);
  EXPECT_NEAR(grid.p, 0.25, 1e-9);
}

TEST(SolveTest, MechanismRespectsEpsilonAndCaps) {
  auto spec = GameSpec::with_hamming(prior2(0.8), 1.2);
  spec.caps(1, 0) = 0.1;
  auto sol = solve_optimal_mechanism(spec);
  EXPECT_LE(ldp::ldp_epsilon(sol.mechanism), 1.2 + 1e-9);
  EXPECT_LE(sol.mechanism(1, 0), 0.1 + 1e-9);
  EXPECT_NEAR(sol.expected_privacy,
              expected_privacy(sol.mechanism, spec.prior, spec.privacy_metric), 1e-12);
}

TEST(SolveTest, RandomBinarySpecsMatchGrid) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) {
    double eps = 3 * u(rng);
    auto spec = GameSpec::with_hamming(prior2(0.05 + 0.9 * u(rng)), eps);
    // Caps at or above the RR flip keep every spec feasible.
    double flip = ldp::rr_matrix(eps)(0, 1);
    spec.caps(0, 1) = flip + (1 - flip) * u(rng);
    spec.caps(1, 0) = flip + (1 - flip) * u(rng);
    auto sol = solve_optimal_mechanism(spec);
    auto grid = grid_optimum(spec, 1e-2);
    ASSERT_GE(grid.privacy, 0) << i;
    EXPECT_GE(sol.expected_privacy, grid.privacy - 1e-9) << i;
    EXPECT_NEAR(sol.expected_privacy, grid.privacy, 2e-2) << i;
  }
}

TEST(SolveTest, GameNeverWorseThanRrUnderRrCaps) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    double eps = 5 * u(rng);
    auto spec = GameSpec::with_hamming(prior2(0.02 + 0.96 * u(rng)), eps);
    spec.caps = rr_caps(eps);
    auto sol = solve_optimal_mechanism(spec);
    double rr = expected_privacy(ldp::rr_matrix(eps), spec.prior, spec.privacy_metric);
    EXPECT_GE(sol.expected_privacy, rr - 1e-7) << eps;
  }
}

TEST(SolveTest, CapsRowBelowOneIsInfeasible) {
  auto spec = GameSpec::with_hamming(prior2(0.5), 1.0);
  spec.caps(1, 0) = 0.3;
  spec.caps(1, 1) = 0.3;
  try {
    solve_optimal_mechanism(spec);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(SolveTest, DpAgainstCapsInfeasible) {
  // Zero-epsilon needs equal columns, but caps force truth to be kept.
  auto spec = GameSpec::with_hamming(prior2(0.5), 0.0);
  spec.caps(0, 1) = 0.0;
  spec.caps(1, 0) = 0.0;
  EXPECT_THROW(solve_optimal_mechanism(spec), InfeasibleError);
}

TEST(SpecTest, Validation) {
  auto spec = GameSpec::with_hamming(prior2(0.5), 1.0);
  spec.prior(0) = 0.6;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = GameSpec::with_hamming(prior2(0.5), 1.0);
  spec.privacy_metric(0, 0) = 0.5;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = GameSpec::with_hamming(prior2(0.5), 1.0);
  spec.caps(0, 0) = 1.5;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(AccuracyVariantTest, ZeroLossMatchesCapsFree) {
  auto spec = GameSpec::with_hamming(prior2(0.7), 1.0);
  auto free = solve_optimal_mechanism(spec);
  auto var = solve_accuracy_variant(spec, Eigen::MatrixXd::Zero(2, 2), 0.0);
  EXPECT_NEAR(var.expected_privacy, free.expected_privacy, 1e-9);
}

TEST(AccuracyVariantTest, ZeroBudgetForcesIdentity) {
  auto spec = GameSpec::with_hamming(prior2(0.5), ldp::kInfinity);
  auto sol = solve_accuracy_variant(spec, hamming_metric(2), 0.0);
  EXPECT_NEAR(sol.expected_privacy, 0.0, 1e-9);
  EXPECT_NEAR(sol.mechanism(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(sol.mechanism(1, 1), 1.0, 1e-9);
}

TEST(AccuracyVariantTest, QuarterBudgetAgainstGrid) {
  auto spec = GameSpec::with_hamming(prior2(0.5), ldp::kInfinity);
  auto sol = solve_accuracy_variant(spec, hamming_metric(2), 0.25);
  double best = 0;
  for (int i = 0; i <= 1000; ++i) {
    for (int j = 0; j <= 1000; ++j) {
      double p = i * 1e-3, q = j * 1e-3;
      if (0.5 * p + 0.5 * q > 0.25 + 1e-12) continue;
      best = std::max(best, binary_privacy(p, q, 0.5, 0.5));
    }
  }
  EXPECT_NEAR(best, 0.25, 1e-9);
  EXPECT_NEAR(sol.expected_privacy, best, 1e-9);
}

TEST(CapsTest, RrAndReduced) {
  auto c = rr_caps(kLn3);
  EXPECT_EQ(c(0, 0), 1.0);
  EXPECT_NEAR(c(0, 1), 0.25, 1e-15);
  auto r = reduced_flip_caps(kLn3, 0, 1, 0.9);
  EXPECT_NEAR(r(0, 1), 0.225, 1e-15);
  EXPECT_EQ(r(1, 0), 1.0);
  EXPECT_THROW(reduced_flip_caps(1.0, 1, 1, 0.9), ConfigError);
}

}  // namespace
}  // namespace starlit::game

namespace starlit::lp {
namespace {

TEST(SimplexTest, TextbookMaximum) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3.
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(3, 2);
  lp.a_ub.resize(0, 2);
  lp.a_eq.resize(0, 2);
  lp.add_ub(Eigen::RowVector2d(1, 1), 4, "a");
  lp.add_ub(Eigen::RowVector2d(1, 3), 6, "b");
  lp.add_ub(Eigen::RowVector2d(1, 0), 3, "c");
  auto r = solve(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 11.0, 1e-9);
  EXPECT_NEAR(r.x(0), 3.0, 1e-9);
  EXPECT_NEAR(r.x(1), 1.0, 1e-9);
}

TEST(SimplexTest, EqualityAndNegativeRhs) {
  // max x s.t. x + y == 2, -y <= -1.5.
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(1, 0);
  lp.a_ub.resize(0, 2);
  lp.a_eq.resize(0, 2);
  lp.add_eq(Eigen::RowVector2d(1, 1), 2, "e");
  lp.add_ub(Eigen::RowVector2d(0, -1), -1.5, "n");
  auto r = solve(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 0.5, 1e-9);
}

TEST(SimplexTest, InfeasibleAndUnbounded) {
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(1, 1);
  lp.a_ub.resize(0, 2);
  lp.a_eq.resize(0, 2);
  lp.add_ub(Eigen::RowVector2d(1, 0), -1, "neg");
  EXPECT_EQ(solve(lp).status, LpStatus::kInfeasible);

  LinearProgram open;
  open.objective = Eigen::Vector2d(1, 0);
  open.a_ub.resize(0, 2);
  open.a_eq.resize(0, 2);
  open.add_ub(Eigen::RowVector2d(0, 1), 1, "y");
  EXPECT_EQ(solve(open).status, LpStatus::kUnbounded);
}

TEST(SimplexTest, DegenerateProblemTerminates) {
  // Classic cycling example under the largest-coefficient rule.
  LinearProgram lp;
  lp.objective = Eigen::Vector4d(10, -57, -9, -24);
  lp.a_ub.resize(0, 4);
  lp.a_eq.resize(0, 4);
  lp.add_ub(Eigen::RowVector4d(0.5, -5.5, -2.5, 9), 0, "r1");
  lp.add_ub(Eigen::RowVector4d(0.5, -1.5, -0.5, 1), 0, "r2");
  lp.add_ub(Eigen::RowVector4d(1, 0, 0, 0), 1, "r3");
  auto r = solve(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
}

}  // namespace
}  // namespace starlit::lp
