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

#ifndef STARLIT_PAILLIER_H_
#define STARLIT_PAILLIER_H_

#include <cstdint>
#include <memory>
#include <span>

#include <gmpxx.h>

#include "starlit/common.h"

namespace starlit::he {

struct Ciphertext {
  mpz_class value;
  std::uint64_t key_id = 0;  // fingerprint of the public key it was made under
};

// Seeded randomness stream for encryption; one per party.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);
  // Uniform in [1, n) and coprime to n.
  mpz_class unit_mod(const mpz_class& n);

 private:
  gmp_randclass rng_;
};

class PaillierPublicKey {
 public:
  PaillierPublicKey() = default;
  explicit PaillierPublicKey(mpz_class n);

  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n2_; }
  std::uint64_t id() const { return id_; }
  std::size_t modulus_bits() const { return mpz_sizeinbase(n_.get_mpz_t(), 2); }
  // Fixed serialized size of one ciphertext (bytes of n^2).
  std::size_t ciphertext_bytes() const { return (mpz_sizeinbase(n2_.get_mpz_t(), 2) + 7) / 8; }

  // m is reduced mod n. c = (1 + m n) r^n mod n^2 (generator g = n + 1).
  Ciphertext encrypt(const mpz_class& m, RandomStream& rng) const;
  Ciphertext encrypt_with(const mpz_class& m, const mpz_class& r) const;
  // Throws ConfigError on a ciphertext made under another key.
  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext mul_plain(const Ciphertext& c, const mpz_class& k) const;
  // Encryption of zero with r = 1; identity for add.
  Ciphertext zero() const;
  // In-place accumulate without the key check (hot loop of histogram builds).
  void add_into(Ciphertext& acc, const Ciphertext& c) const;

  Bytes serialize(const Ciphertext& c) const;
  Ciphertext deserialize(std::span<const std::uint8_t> bytes) const;

 private:
  void check(const Ciphertext& c) const;

  mpz_class n_, n2_;
  std::uint64_t id_ = 0;
};

class PaillierPrivateKey {
 public:
  PaillierPrivateKey(const mpz_class& p, const mpz_class& q);

  const PaillierPublicKey& public_key() const { return pub_; }
  const mpz_class& lambda() const { return lambda_; }
  const mpz_class& mu() const { return mu_; }

  // CRT decryption. Throws ConfigError on a foreign ciphertext.
  mpz_class decrypt(const Ciphertext& c) const;
  // Textbook decryption m = L(c^lambda mod n^2) * mu mod n; slower, used as
  // a cross-check.
  mpz_class decrypt_textbook(const Ciphertext& c) const;
  // Same ciphertext distribution as the public encrypt, with r^n computed
  // through the factorization.
  Ciphertext encrypt(const mpz_class& m, RandomStream& rng) const;
  Ciphertext encrypt_with(const mpz_class& m, const mpz_class& r) const;

 private:
  PaillierPublicKey pub_;
  mpz_class p_, q_, p2_, q2_;
  mpz_class lambda_, mu_;
  mpz_class hp_, hq_;          // CRT decryption constants
  mpz_class q_inv_p_;          // q^-1 mod p
  mpz_class q2_inv_p2_;        // q^2^-1 mod p^2
  mpz_class n_mod_p2_phi_, n_mod_q2_phi_;  // n reduced mod phi(p^2), phi(q^2)
};

struct PaillierKeypair {
  PaillierPublicKey public_key;
  std::shared_ptr<const PaillierPrivateKey> private_key;
};

// Deterministic for a fixed seed. bits must be 512, 1024 or 2048; primes are
// equal-size and pass 40 Miller-Rabin rounds.
PaillierKeypair keygen(int bits, std::uint64_t seed);

// Signed fixed-point with 40 fractional bits. Negative raws are stored as
// n - |raw|; decoding treats residues above n/2 as negative.
class FixedPointCodec {
 public:
  static constexpr int kFractionalBits = 40;
  static constexpr double kScale = 1099511627776.0;  // 2^40

  explicit FixedPointCodec(mpz_class n) : n_(std::move(n)), half_(n_ / 2) {}

  static std::int64_t to_raw(double x);
  static double from_raw(__int128 raw) { return static_cast<double>(raw) / kScale; }

  mpz_class encode(double x) const { return encode_raw(to_raw(x)); }
  mpz_class encode_raw(__int128 raw) const;
  __int128 decode_raw(const mpz_class& m) const;
  double decode(const mpz_class& m) const { return from_raw(decode_raw(m)); }

 private:
  mpz_class n_, half_;
};

mpz_class to_mpz(__int128 v);
__int128 to_int128(const mpz_class& v);

}  // namespace starlit::he

#endif  // STARLIT_PAILLIER_H_
