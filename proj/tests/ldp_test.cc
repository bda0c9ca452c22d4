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
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "starlit/common.h"
#include "starlit/ldp.h"

namespace starlit::ldp {
namespace {

const double kLn3 = std::log(3.0);

TEST(RrTest, ZeroEpsilonIsUniform) {
  auto m = rr_matrix(0.0, 2);
  EXPECT_EQ(m.probabilities(), Eigen::MatrixXd::Constant(2, 2, 0.5));
}

TEST(RrTest, LnThreeBinary) {
  auto m = rr_matrix(kLn3, 2);
  EXPECT_NEAR(m(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(m(1, 1), 0.75, 1e-15);
  EXPECT_NEAR(m(0, 1), 0.25, 1e-15);
}

TEST(RrTest, LnThreeQuaternary) {
  auto m = rr_matrix(kLn3, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(m(i, j), i == j ? 0.5 : 1.0 / 6.0, 1e-15);
  }
}

TEST(RrTest, LargeEpsilonStaysStochastic) {
  auto m = rr_matrix(800.0, 3);
  EXPECT_EQ(m(0, 0), 1.0);
  EXPECT_GE(m(0, 1), 0.0);
  auto inf = rr_matrix(kInfinity, 2);
  EXPECT_EQ(inf, identity_mechanism(2));
}

TEST(RrTest, RejectsBadArguments) {
  EXPECT_THROW(rr_matrix(-0.1), ConfigError);
  EXPECT_THROW(rr_matrix(std::nan("")), ConfigError);
  EXPECT_THROW(rr_matrix(1.0, 1), ConfigError);
}

TEST(LaplaceTest, ClosedForm) {
  EXPECT_EQ(laplace_matrix(0.0).probabilities(), Eigen::MatrixXd::Constant(2, 2, 0.5));
  auto m = laplace_matrix(2.0);
  EXPECT_NEAR(m(0, 1), 0.18393972058572117, 1e-15);
  EXPECT_NEAR(m(1, 1), 0.8160602794142788, 1e-15);
  EXPECT_THROW(laplace_matrix(1.0, 3), ConfigError);
  EXPECT_THROW(laplace_matrix(-1.0), ConfigError);
}

TEST(LaplaceTest, RrKeepsTruthMoreOften) {
  auto rr = rr_matrix(2.0);
  auto lap = laplace_matrix(2.0);
  EXPECT_NEAR(rr(0, 0), 0.8807970779778823, 1e-15);
  EXPECT_GT(rr(0, 0), lap(0, 0));
  for (double eps = 0.1; eps <= 10; eps += 0.1) EXPECT_GE(rr(0, 0), lap(0, 0));
}

// Entries against the textbook formulas, and epsilon recovered from the channel.
TEST(EpsilonTest, GridAgreesWithFormulas) {
  for (int i = 0; i <= 20; ++i) {
    double eps = 0.5 * i;
    auto rr = rr_matrix(eps);
    auto lap = laplace_matrix(eps);
    double e = std::exp(eps);
    EXPECT_NEAR(rr(0, 0), e / (1 + e), 1e-12);
    EXPECT_NEAR(rr(0, 1), 1 / (1 + e), 1e-12);
    EXPECT_NEAR(lap(0, 1), 0.5 * std::exp(-eps / 2), 1e-12);
    EXPECT_NEAR(ldp_epsilon(rr), eps, 1e-9);
  }
}

TEST(EpsilonTest, SpecialMatrices) {
  EXPECT_EQ(ldp_epsilon(rr_matrix(0.0)), 0.0);
  EXPECT_NEAR(ldp_epsilon(rr_matrix(kLn3)), kLn3, 1e-12);
  EXPECT_TRUE(std::isinf(ldp_epsilon(identity_mechanism(2))));
  // Laplace-threshold is epsilon/2 tight in the binary output.
  EXPECT_NEAR(ldp_epsilon(laplace_matrix(4.0)),
              std::log((1 - 0.5 * std::exp(-2.0)) / (0.5 * std::exp(-2.0))), 1e-12);
}

TEST(MatrixTest, ValidatesShapeAndRows) {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  EXPECT_THROW(TransformationMatrix{bad}, ConfigError);
  EXPECT_THROW(TransformationMatrix{Eigen::MatrixXd::Ones(2, 3)}, ConfigError);
  EXPECT_THROW(TransformationMatrix{Eigen::MatrixXd::Ones(1, 1)}, ConfigError);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.5, -0.5, 0, 1;
  EXPECT_THROW(TransformationMatrix{neg}, ConfigError);
}

TEST(ApplyTest, IdentityIsPassThrough) {
  std::vector<int> v = {0, 1, 1, 0, 1};
  EXPECT_EQ(apply_mechanism(identity_mechanism(2), v, 3), v);
}

TEST(ApplyTest, DeterministicForSeed) {
  std::vector<int> v(1000, 1);
  auto m = rr_matrix(1.0);
  EXPECT_EQ(apply_mechanism(m, v, 5), apply_mechanism(m, v, 5));
  EXPECT_NE(apply_mechanism(m, v, 5), apply_mechanism(m, v, 6));
}

TEST(ApplyTest, UniformChannelIsFair) {
  std::vector<int> zeros(100000, 0);
  auto out = apply_mechanism(rr_matrix(0.0), zeros, 17);
  double ones = std::accumulate(out.begin(), out.end(), 0.0) / out.size();
  EXPECT_GE(ones, 0.494);
  EXPECT_LE(ones, 0.506);
}

TEST(ApplyTest, FlipRateMatchesChannel) {
  std::vector<int> v(100000, 1);
  auto m = rr_matrix(1.0);
  auto out = apply_mechanism(m, v, 23);
  double zeros = std::count(out.begin(), out.end(), 0) / 1e5;
  double p = m(1, 0);
  EXPECT_NEAR(zeros, p, 3 * std::sqrt(p * (1 - p) / 1e5) + 1e-9);
}

TEST(ApplyTest, RejectsOutOfAlphabet) {
  std::vector<int> v = {0, 2};
  EXPECT_THROW(apply_mechanism(rr_matrix(1.0), v, 1), ConfigError);
}

TEST(CsvTest, RoundTripExact) {
  auto m = rr_matrix(0.7, 3);
  EXPECT_EQ(from_csv(to_csv(m)), m);
  EXPECT_THROW(from_csv("0.5,0.5\n0.5\n"), Error);
}

}  // namespace
}  // namespace starlit::ldp
