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

#include <random>

#include <gtest/gtest.h>

#include "starlit/common.h"
#include "starlit/psi.h"

namespace starlit::psi {
namespace {

std::string random_identity(std::mt19937_64& rng) {
  static const char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 ";
  std::uniform_int_distribution<int> len(8, 60), ch(0, sizeof(kAlphabet) - 2);
  std::string s(static_cast<std::size_t>(len(rng)), ' ');
  for (auto& c : s) c = kAlphabet[ch(rng)];
  return s;
}

TEST(PsiTest, SmallSets) {
  auto t = psi_intersect({"a", "b", "c"}, {"b", "c", "d"}, 1);
  EXPECT_EQ(t.intersection, (ElementSet{"b", "c"}));
  ASSERT_EQ(t.rounds.size(), 2u);
  EXPECT_EQ(t.rounds[0].direction, "client->server");
  EXPECT_EQ(t.rounds[0].bytes, 4 + 3 * kPointBytes);
  EXPECT_EQ(t.rounds[1].bytes, 4 + 3 * kPointBytes + 4 + 3 * kPointBytes);
  EXPECT_EQ(t.total_bytes(), t.rounds[0].bytes + t.rounds[1].bytes);
}

TEST(PsiTest, EmptySide) {
  EXPECT_TRUE(psi_intersect({"x", "y"}, {}, 1).intersection.empty());
  EXPECT_TRUE(psi_intersect({}, {"x"}, 1).intersection.empty());
}

TEST(PsiTest, PlaintextOracle) {
  EXPECT_EQ(plaintext_intersection({"x"}, {"x"}), ElementSet{"x"});
  EXPECT_TRUE(plaintext_intersection({"x"}, {"y"}).empty());
  std::mt19937_64 rng(3);
  ElementSet shared, a, b;
  while (shared.size() < 100) shared.insert("s" + random_identity(rng));
  a = shared;
  b = shared;
  while (a.size() < 1000) a.insert("a" + random_identity(rng));
  while (b.size() < 1000) b.insert("b" + random_identity(rng));
  EXPECT_EQ(plaintext_intersection(a, b), shared);
}

TEST(PsiTest, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> log_size(0, 12);
  for (int i = 0; i < 30; ++i) {
    std::size_t ns = std::size_t{1} << log_size(rng);
    std::size_t nc = std::size_t{1} << log_size(rng);
    ElementSet s, c;
    while (s.size() < ns) s.insert(random_identity(rng));
    for (const auto& x : s) {
      if (c.size() < nc && rng() % 3 == 0) c.insert(x);
    }
    while (c.size() < nc) c.insert(random_identity(rng));
    EXPECT_EQ(psi_intersect(s, c, rng()).intersection, plaintext_intersection(s, c)) << i;
  }
}

TEST(PsiTest, RolesLearnOnlySizes) {
  PsiServer server({"a", "b", "c", "d"}, 5);
  PsiClient client({"b", "z"}, 6);
  Bytes req = client.request();
  Bytes resp = server.respond(req);
  EXPECT_EQ(server.client_set_size(), 2u);
  EXPECT_EQ(client.finish(resp), ElementSet{"b"});
  EXPECT_EQ(client.server_set_size(), 4u);
}

TEST(PsiTest, BlindedRequestHidesElements) {
  PsiClient c1({"identity-one"}, 1), c2({"identity-one"}, 2);
  Bytes a = c1.request(), b = c2.request();
  EXPECT_NE(a, b);
  std::string text(a.begin(), a.end());
  EXPECT_EQ(text.find("identity-one"), std::string::npos);
}

TEST(PsiTest, RejectsBadElements) {
  EXPECT_THROW(PsiClient({""}, 1), ConfigError);
  EXPECT_THROW(PsiServer({std::string(kMaxElementBytes + 1, 'x')}, 1), ConfigError);
}

TEST(PsiTest, MalformedMessages) {
  PsiServer server({"a"}, 1);
  PsiClient client({"a"}, 2);
  Bytes req = client.request();
  Bytes longer = req;
  longer.push_back(0);
  EXPECT_THROW(server.respond(longer), ProtocolError);
  Bytes truncated(req.begin(), req.end() - 1);
  EXPECT_THROW(server.respond(truncated), ProtocolError);
  Bytes bad = req;
  std::fill(bad.begin() + 4, bad.end(), 0xff);  // not a valid point encoding
  EXPECT_THROW(server.respond(bad), ProtocolError);
  Bytes resp = server.respond(req);
  resp.push_back(1);
  EXPECT_THROW(client.finish(resp), ProtocolError);
}

TEST(PsiBenchTest, SingleSize) {
  auto rows = bench_psi({512}, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].size, 512u);
  EXPECT_TRUE(rows[0].correct);
  EXPECT_GT(rows[0].seconds, 0.0);
}

TEST(PsiBenchTest, RejectsNonPowers) {
  EXPECT_THROW(bench_psi({500}, 1), ConfigError);
  EXPECT_THROW(bench_psi({1024, 512}, 1), ConfigError);
}

}  // namespace
}  // namespace starlit::psi
