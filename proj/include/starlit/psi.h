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

#ifndef STARLIT_PSI_H_
#define STARLIT_PSI_H_

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "starlit/common.h"

namespace starlit::psi {

// An element is the raw concatenated identity string.
using ElementSet = std::set<std::string>;

inline constexpr std::size_t kMaxElementBytes = 4096;
inline constexpr std::size_t kPointBytes = 32;

struct PsiRound {
  std::string direction;  // "client->server" or "server->client"
  std::size_t bytes = 0;
};

struct PsiTranscript {
  std::vector<PsiRound> rounds;
  ElementSet intersection;  // delivered to the client role only
  std::size_t total_bytes() const;
};

// Client role. Holds the blinding scalar; learns the intersection.
class PsiClient {
 public:
  PsiClient(ElementSet elements, std::uint64_t seed);
  ~PsiClient();
  PsiClient(const PsiClient&) = delete;
  PsiClient& operator=(const PsiClient&) = delete;

  // H(y)^b for each element, in the sorted order of the set.
  Bytes request();
  ElementSet finish(std::span<const std::uint8_t> response);
  // Size of the server set, revealed by the response.
  std::size_t server_set_size() const { return server_size_; }

 private:
  std::vector<std::string> elements_;
  std::array<std::uint8_t, 32> blind_{};
  std::size_t server_size_ = 0;
};

// Server role. Holds the OPRF key; learns only the client set size.
class PsiServer {
 public:
  PsiServer(ElementSet elements, std::uint64_t seed);
  ~PsiServer();
  PsiServer(const PsiServer&) = delete;
  PsiServer& operator=(const PsiServer&) = delete;

  // Evaluates the blinded points and appends the sorted encodings H(x)^a of
  // the server set.
  Bytes respond(std::span<const std::uint8_t> request);
  std::size_t client_set_size() const { return client_size_; }

 private:
  std::vector<std::string> elements_;
  std::array<std::uint8_t, 32> key_{};
  std::size_t client_size_ = 0;
};

// Runs both roles in-process. Either set may be empty, in which case no
// messages are exchanged and the result is empty.
PsiTranscript psi_intersect(const ElementSet& server_set, const ElementSet& client_set,
                            std::uint64_t seed);

ElementSet plaintext_intersection(const ElementSet& a, const ElementSet& b);

struct BenchRow {
  std::size_t size = 0;
  double seconds = 0.0;
  bool correct = false;
};

// Both parties hold `size` random identities with half of them shared.
std::vector<BenchRow> bench_psi(const std::vector<std::size_t>& sizes, std::uint64_t seed);

}  // namespace starlit::psi

#endif  // STARLIT_PSI_H_
