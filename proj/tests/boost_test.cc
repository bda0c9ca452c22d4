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

#include "starlit/boost.h"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "toy_frames.h"

namespace starlit::boost {
namespace {

using starlit::testing::make_toy_frame;

double loss(int y, double s) {
  double p = 1.0 / (1.0 + std::exp(-s));
  return -(y * std::log(p) + (1 - y) * std::log(1 - p));
}

TEST(LogisticGradHess, AtZeroScore) {
  std::vector<int> y = {1, 0};
  std::vector<double> s = {0.0, 0.0};
  GradHess gh = logistic_grad_hess(y, s);
  EXPECT_DOUBLE_EQ(gh.g[0], -0.5);
  EXPECT_DOUBLE_EQ(gh.h[0], 0.25);
  EXPECT_DOUBLE_EQ(gh.g[1], 0.5);
  EXPECT_DOUBLE_EQ(gh.h[1], 0.25);
}

TEST(LogisticGradHess, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> score(-4, 4);
  const double step = 1e-5;
  for (int i = 0; i < 10; ++i) {
    int y = i % 2;
    double s = score(rng);
    GradHess gh = logistic_grad_hess(std::vector<int>{y}, std::vector<double>{s});
    double g_fd = (loss(y, s + step) - loss(y, s - step)) / (2 * step);
    double h_fd = (loss(y, s + step) - 2 * loss(y, s) + loss(y, s - step)) / (step * step);
    EXPECT_NEAR(gh.g[0], g_fd, 1e-6);
    // Second differences lose ~half the digits at this step.
    EXPECT_NEAR(gh.h[0], h_fd, 1e-4);
    double g_plus = logistic_grad_hess(std::vector<int>{y}, std::vector<double>{s + step}).g[0];
    double g_minus = logistic_grad_hess(std::vector<int>{y}, std::vector<double>{s - step}).g[0];
    EXPECT_NEAR(gh.h[0], (g_plus - g_minus) / (2 * step), 1e-6);
  }
}

TEST(SplitGain, HandValues) {
  EXPECT_DOUBLE_EQ(split_gain(0, 1, 0, 1, 1, 0.3), -0.3);
  EXPECT_NEAR(split_gain(2, 3, -1, 2, 1, 0), 7.0 / 12.0, 1e-12);
  EXPECT_DOUBLE_EQ(split_gain(2, 3, -1, 2, 1, 0), split_gain(-1, 2, 2, 3, 1, 0));
}

TEST(Goss, TopRateOneKeepsEverything) {
  std::vector<double> g = {0.3, -0.1, 0.7, 0.2};
  RowSample s = goss_sample(g, 1.0, 0.0, 3);
  EXPECT_EQ(s.indices, (std::vector<std::uint32_t>{0, 1, 2, 3}));
  for (double w : s.weights) EXPECT_EQ(w, 1.0);
}

TEST(Goss, LargestGradientsAlwaysKept) {
  std::vector<double> g = {0.1, -0.9, 0.2, 0.05, 0.8, -0.3, 0.0, 0.15, 0.25, -0.2};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RowSample s = goss_sample(g, 0.2, 0.3, seed);
    ASSERT_EQ(s.indices.size(), 5u);
    auto has = [&s](std::uint32_t i) {
      return std::find(s.indices.begin(), s.indices.end(), i) != s.indices.end();
    };
    EXPECT_TRUE(has(1));
    EXPECT_TRUE(has(4));
  }
}

TEST(Goss, WeightedSumIsUnbiased) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<double> g(100);
  for (double& v : g) v = u(rng);
  double full = std::accumulate(g.begin(), g.end(), 0.0);
  double mean = 0;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    RowSample s = goss_sample(g, 0.2, 0.1, derive_seed(5, "goss-mc", rep));
    double sum = 0;
    for (std::size_t k = 0; k < s.indices.size(); ++k) sum += g[s.indices[k]] * s.weights[k];
    mean += sum / reps;
  }
  EXPECT_NEAR(mean, full, 0.01 * full);
}

TEST(FeatureCuts, FewDistinctValuesGetOwnBins) {
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 1, 0, 2, 1;
  FeatureCuts c = FeatureCuts::fit(x, 32);
  EXPECT_EQ(c.n_bins(0), 3);
  EXPECT_EQ(c.bin(0, 0.0), 0);
  EXPECT_EQ(c.bin(0, 1.0), 1);
  EXPECT_EQ(c.bin(0, 2.0), 2);
  EXPECT_EQ(c.bin(0, 5.0), 2);
}

TEST(FeatureCuts, EqualFrequency) {
  Eigen::MatrixXd x(100, 1);
  for (int i = 0; i < 100; ++i) x(i, 0) = i;
  FeatureCuts c = FeatureCuts::fit(x, 4);
  EXPECT_EQ(c.cuts()[0], (std::vector<double>{24, 49, 74}));
}

TEST(TrainCentralized, SeparableDataIsLearned) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd x(200, 2);
  std::vector<int> y(200);
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = u(rng);
    x(i, 1) = u(rng);
    y[i] = x(i, 0) + x(i, 1) > 0;
  }
  BoostParams p;
  p.n_trees = 30;
  p.max_depth = 4;
  Model m = train_centralized(x, y, p);
  Eigen::VectorXd s = predict(m, x, Eigen::MatrixXd(200, 0));
  // Any ranking error among positives/negatives shows up as a crossing pair.
  int crossings = 0;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) crossings += y[i] == 1 && y[j] == 0 && s[i] <= s[j];
  }
  EXPECT_LT(crossings, 100);
  for (const auto& t : m.trees) EXPECT_LE(t.depth(), 4);
}

TEST(TrainCentralized, ZeroTreesGivesBaseScore) {
  auto f = make_toy_frame(50, 2, 0, 1);
  BoostParams p;
  p.n_trees = 0;
  Model m = train_centralized(f.srv, f.labels, p);
  double pos = std::accumulate(f.labels.begin(), f.labels.end(), 0.0) / 50.0;
  std::vector<double> row = {0.0, 0.0};
  EXPECT_NEAR(predict(m, row), pos, 1e-12);
}

TEST(TrainCentralized, SingleClassIsAnError) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
  std::vector<int> y(10, 1);
  EXPECT_THROW(train_centralized(x, y, BoostParams{}), ConfigError);
}

TEST(TrainCentralized, ColumnPermutationGivesSamePredictions) {
  auto f = make_toy_frame(300, 4, 0, 9);
  Eigen::MatrixXd perm(300, 4);
  perm << f.srv.col(2), f.srv.col(0), f.srv.col(3), f.srv.col(1);
  BoostParams p;
  // Ties in gain across columns are broken by index; distinct columns here.
  Model a = train_centralized(f.srv, f.labels, p);
  Model b = train_centralized(perm, f.labels, p);
  Eigen::VectorXd pa = predict(a, f.srv, Eigen::MatrixXd(300, 0));
  Eigen::VectorXd pb = predict(b, perm, Eigen::MatrixXd(300, 0));
  EXPECT_LT((pa - pb).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TrainCentralized, DeterministicModelBytes) {
  auto f = make_toy_frame(300, 4, 0, 4);
  BoostParams p;
  p.direct_sampling_rate = 0.4;
  p.goss = GossParams{0.1, 0.1};
  EXPECT_EQ(model_to_string(train_centralized(f.srv, f.labels, p)),
            model_to_string(train_centralized(f.srv, f.labels, p)));
}

TEST(Model, TextRoundTrip) {
  auto f = make_toy_frame(200, 3, 0, 2);
  Model m = train_centralized(f.srv, f.labels, BoostParams{});
  std::string text = model_to_string(m);
  std::istringstream in(text);
  Model back = load_model(in);
  EXPECT_EQ(model_to_string(back), text);
  EXPECT_EQ(back.trees, m.trees);
}

TEST(Model, RejectsGarbage) {
  std::istringstream in("starlit-gbt 1\nbase_score x\n");
  EXPECT_THROW(load_model(in), ParseError);
}

TEST(Model, ZeroLeafTreeLeavesScoreUnchanged) {
  auto f = make_toy_frame(100, 2, 0, 6);
  Model m = train_centralized(f.srv, f.labels, BoostParams{});
  std::vector<double> row = {f.srv(0, 0), f.srv(0, 1)};
  double before = predict(m, row);
  m.trees.push_back(Tree{{TreeNode{}}});
  EXPECT_EQ(predict(m, row), before);
}

class VerticalTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { keys_ = new he::PaillierKeypair(he::keygen(512, 99)); }
  static void TearDownTestSuite() { delete keys_; }
  static he::PaillierKeypair* keys_;
};
he::PaillierKeypair* VerticalTest::keys_ = nullptr;

TEST_F(VerticalTest, MatchesCentralizedOnConcatenatedFrame) {
  auto f = make_toy_frame(500, 4, 4, 21);
  BoostParams p;
  p.n_trees = 4;
  PassiveParty fc(f.fc, f.ids, p.n_bins);
  DirectChannel channel(fc);
  Model fed = train_vertical({f.srv, f.labels, f.ids}, channel, p, *keys_);
  Model cen = train_centralized(f.concatenated(), f.labels, p);

  ASSERT_EQ(fed.trees.size(), cen.trees.size());
  bool any_fc = false;
  for (std::size_t t = 0; t < fed.trees.size(); ++t) {
    ASSERT_EQ(fed.trees[t].nodes.size(), cen.trees[t].nodes.size());
    for (std::size_t i = 0; i < fed.trees[t].nodes.size(); ++i) {
      const auto& a = fed.trees[t].nodes[i];
      const auto& b = cen.trees[t].nodes[i];
      ASSERT_EQ(a.is_leaf, b.is_leaf);
      if (a.is_leaf) {
        EXPECT_NEAR(a.weight, b.weight, 1e-12);
      } else {
        int global = a.party == Party::kSrv ? a.feature : 4 + a.feature;
        EXPECT_EQ(global, b.feature);
        EXPECT_EQ(a.bin, b.bin);
        any_fc |= a.party == Party::kFc;
      }
    }
  }
  EXPECT_TRUE(any_fc);

  fed.cuts[1] = fc.cuts();
  Eigen::VectorXd pf = predict(fed, f.srv, f.fc);
  Eigen::VectorXd pc = predict(cen, f.concatenated(), Eigen::MatrixXd(500, 0));
  EXPECT_LT((pf - pc).cwiseAbs().maxCoeff(), 1e-6);

  auto refs = fc_nodes(fed);
  auto bits = evaluate_fc_nodes(fc.cuts(), refs, f.fc);
  Eigen::VectorXd ps = predict_with_fc_bits(fed, f.srv, refs, bits);
  EXPECT_LT((ps - pc).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(VerticalTest, MissingFcRowIsAnError) {
  auto f = make_toy_frame(300, 1, 2, 8);
  BoostParams p;
  p.n_trees = 2;
  PassiveParty fc(f.fc, f.ids, p.n_bins);
  DirectChannel channel(fc);
  Model fed = train_vertical({f.srv, f.labels, f.ids}, channel, p, *keys_);
  ASSERT_TRUE(fed.has_fc_splits());
  fed.cuts[1] = fc.cuts();
  std::vector<double> row = {f.srv(0, 0)};
  EXPECT_THROW(predict(fed, row), ConfigError);
}

TEST_F(VerticalTest, EmptyFcViewEqualsSrvOnly) {
  auto f = make_toy_frame(200, 3, 0, 12);
  BoostParams p;
  p.n_trees = 3;
  PassiveParty fc(f.fc, f.ids, p.n_bins);
  DirectChannel channel(fc);
  Model fed = train_vertical({f.srv, f.labels, f.ids}, channel, p, *keys_);
  Model cen = train_centralized(f.srv, f.labels, p);
  EXPECT_EQ(model_to_string(fed), model_to_string(cen));
}

TEST_F(VerticalTest, MisalignedRowsAreRejected) {
  auto f = make_toy_frame(100, 2, 2, 13);
  auto ids = f.ids;
  std::swap(ids[3], ids[4]);
  PassiveParty fc(f.fc, ids, 32);
  DirectChannel channel(fc);
  EXPECT_THROW(train_vertical({f.srv, f.labels, f.ids}, channel, BoostParams{}, *keys_),
               ProtocolError);
}

}  // namespace
}  // namespace starlit::boost
