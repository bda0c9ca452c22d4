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

#include "starlit/psi.h"

#include <sodium.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <iterator>
#include <random>

namespace starlit::psi {
namespace {

using Point = std::array<std::uint8_t, kPointBytes>;
using Scalar = std::array<std::uint8_t, crypto_core_ristretto255_SCALARBYTES>;

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error("libsodium initialization failed");
}

void check_elements(const ElementSet& s) {
  for (const auto& e : s) {
    if (e.empty()) throw ConfigError("PSI element is empty");
    if (e.size() > kMaxElementBytes) {
      throw ConfigError("PSI element exceeds " + std::to_string(kMaxElementBytes) + " bytes");
    }
  }
}

Point hash_to_group(const std::string& element) {
  static constexpr char kTag[] = "starlit/psi/h2g/v1";
  std::uint8_t digest[crypto_core_ristretto255_HASHBYTES];
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, sizeof digest);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kTag), sizeof kTag);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(element.data()),
                            element.size());
  crypto_generichash_final(&st, digest, sizeof digest);
  Point p;
  crypto_core_ristretto255_from_hash(p.data(), digest);
  return p;
}

Scalar derive_scalar(std::uint64_t seed, std::string_view tag) {
  std::uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES];
  std::uint8_t seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  for (std::uint8_t counter = 0;; ++counter) {
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, sizeof wide);
    crypto_generichash_update(&st, seed_bytes, sizeof seed_bytes);
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(tag.data()),
                              tag.size());
    crypto_generichash_update(&st, &counter, 1);
    crypto_generichash_final(&st, wide, sizeof wide);
    Scalar s;
    crypto_core_ristretto255_scalar_reduce(s.data(), wide);
    if (!sodium_is_zero(s.data(), s.size())) return s;
  }
}

Point mul(const Scalar& s, const std::uint8_t* p) {
  Point out;
  if (crypto_scalarmult_ristretto255(out.data(), s.data(), p) != 0) {
    throw ProtocolError("invalid group element in PSI message");
  }
  return out;
}

}  // namespace

std::size_t PsiTranscript::total_bytes() const {
  std::size_t total = 0;
  for (const auto& r : rounds) total += r.bytes;
  return total;
}

PsiClient::PsiClient(ElementSet elements, std::uint64_t seed)
    : elements_(elements.begin(), elements.end()) {
  ensure_sodium();
  check_elements(elements);
  blind_ = derive_scalar(seed, "cli");
}

PsiClient::~PsiClient() { sodium_memzero(blind_.data(), blind_.size()); }

Bytes PsiClient::request() {
  ByteWriter w;
  w.put_u32(static_cast<std::uint32_t>(elements_.size()));
  for (const auto& e : elements_) {
    Point h = hash_to_group(e);
    w.put_raw(mul(blind_, h.data()));
  }
  return w.take();
}

ElementSet PsiClient::finish(std::span<const std::uint8_t> response) {
  ByteReader r(response);
  std::uint32_t echoed = r.get_u32();
  if (echoed != elements_.size()) throw ProtocolError("PSI response size mismatch");
  Scalar unblind;
  if (crypto_core_ristretto255_scalar_invert(unblind.data(), blind_.data()) != 0) {
    throw ProtocolError("PSI blinding scalar not invertible");
  }
  std::vector<Point> mine(echoed);
  for (std::uint32_t i = 0; i < echoed; ++i) {
    mine[i] = mul(unblind, r.get_raw(kPointBytes).data());
  }
  std::uint32_t n_server = r.get_u32();
  std::vector<Point> theirs(n_server);
  for (std::uint32_t i = 0; i < n_server; ++i) {
    auto raw = r.get_raw(kPointBytes);
    std::copy(raw.begin(), raw.end(), theirs[i].begin());
  }
  if (!r.done()) throw ProtocolError("trailing bytes in PSI response");
  server_size_ = n_server;
  std::sort(theirs.begin(), theirs.end());
  ElementSet out;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (std::binary_search(theirs.begin(), theirs.end(), mine[i])) out.insert(elements_[i]);
  }
  return out;
}

PsiServer::PsiServer(ElementSet elements, std::uint64_t seed)
    : elements_(elements.begin(), elements.end()) {
  ensure_sodium();
  check_elements(elements);
  key_ = derive_scalar(seed, "srv");
}

PsiServer::~PsiServer() { sodium_memzero(key_.data(), key_.size()); }

Bytes PsiServer::respond(std::span<const std::uint8_t> request) {
  ByteReader r(request);
  std::uint32_t count = r.get_u32();
  ByteWriter w;
  w.put_u32(count);
  for (std::uint32_t i = 0; i < count; ++i) w.put_raw(mul(key_, r.get_raw(kPointBytes).data()));
  if (!r.done()) throw ProtocolError("trailing bytes in PSI request");
  client_size_ = count;

  std::vector<Point> encodings;
  encodings.reserve(elements_.size());
  for (const auto& e : elements_) {
    Point h = hash_to_group(e);
    encodings.push_back(mul(key_, h.data()));
  }
  // Sorting hides the server's element order.
  std::sort(encodings.begin(), encodings.end());
  w.put_u32(static_cast<std::uint32_t>(encodings.size()));
  for (const auto& p : encodings) w.put_raw(p);
  return w.take();
}

PsiTranscript psi_intersect(const ElementSet& server_set, const ElementSet& client_set,
                            std::uint64_t seed) {
  check_elements(server_set);
  check_elements(client_set);
  PsiTranscript t;
  if (server_set.empty() || client_set.empty()) return t;
  PsiClient client(client_set, seed);
  PsiServer server(server_set, seed);
  Bytes req = client.request();
  t.rounds.push_back({"client->server", req.size()});
  Bytes resp = server.respond(req);
  t.rounds.push_back({"server->client", resp.size()});
  t.intersection = client.finish(resp);
  return t;
}

ElementSet plaintext_intersection(const ElementSet& a, const ElementSet& b) {
  ElementSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

std::vector<BenchRow> bench_psi(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw ConfigError("benchmark sizes must be ascending");
  }
  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    if (size == 0 || (size & (size - 1)) != 0) {
      throw ConfigError("benchmark size " + std::to_string(size) + " is not a power of two");
    }
    std::mt19937_64 rng(derive_seed(seed, "psi-bench", size));
    auto draw = [&rng] {
      char buf[40];
      std::snprintf(buf, sizeof buf, "AC%016llx", static_cast<unsigned long long>(rng()));
      return std::string(buf);
    };
    ElementSet server, client;
    while (server.size() < size) server.insert(draw());
    auto it = server.begin();
    while (client.size() < size / 2) client.insert(*it++);
    while (client.size() < size) client.insert(draw());

    auto start = std::chrono::steady_clock::now();
    PsiTranscript t = psi_intersect(server, client, derive_seed(seed, "psi-session", size));
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back({size, seconds, t.intersection == plaintext_intersection(server, client)});
  }
  return rows;
}

}  // namespace starlit::psi
