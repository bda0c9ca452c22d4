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

#include "starlit/paillier.h"

#include <cmath>
#include <limits>

namespace starlit::he {
namespace {

std::uint64_t fingerprint(const mpz_class& n) {
  std::size_t count = 0;
  auto* words = static_cast<std::uint8_t*>(
      mpz_export(nullptr, &count, 1, 1, 1, 0, n.get_mpz_t()));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= words[i];
    h *= 0x100000001b3ULL;
  }
  void (*free_fn)(void*, std::size_t) = nullptr;
  mp_get_memory_functions(nullptr, nullptr, &free_fn);
  free_fn(words, count);
  return h;
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

mpz_class invert(const mpz_class& a, const mpz_class& mod) {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0) {
    throw Error("modular inverse does not exist");
  }
  return r;
}

mpz_class random_prime(gmp_randclass& rng, int bits) {
  while (true) {
    mpz_class x = rng.get_z_bits(bits);
    mpz_setbit(x.get_mpz_t(), bits - 1);
    mpz_setbit(x.get_mpz_t(), bits - 2);
    mpz_setbit(x.get_mpz_t(), 0);
    mpz_class p;
    mpz_nextprime(p.get_mpz_t(), x.get_mpz_t());
    if (static_cast<int>(mpz_sizeinbase(p.get_mpz_t(), 2)) != bits) continue;
    if (mpz_probab_prime_p(p.get_mpz_t(), 40) == 0) continue;
    return p;
  }
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : rng_(gmp_randinit_mt) {
  rng_.seed(mpz_class(std::to_string(seed)));
}

mpz_class RandomStream::unit_mod(const mpz_class& n) {
  while (true) {
    mpz_class r = rng_.get_z_range(n);
    if (r == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    if (g == 1) return r;
  }
}

PaillierPublicKey::PaillierPublicKey(mpz_class n)
    : n_(std::move(n)), n2_(n_ * n_), id_(fingerprint(n_)) {}

Ciphertext PaillierPublicKey::encrypt(const mpz_class& m, RandomStream& rng) const {
  return encrypt_with(m, rng.unit_mod(n_));
}

Ciphertext PaillierPublicKey::encrypt_with(const mpz_class& m, const mpz_class& r) const {
  mpz_class mm = m % n_;
  if (mm < 0) mm += n_;
  mpz_class c = (1 + mm * n_) % n2_;
  c = (c * powm(r, n_, n2_)) % n2_;
  return Ciphertext{std::move(c), id_};
}

void PaillierPublicKey::check(const Ciphertext& c) const {
  if (c.key_id != id_) throw ConfigError("ciphertext was produced under a different key");
}

Ciphertext PaillierPublicKey::add(const Ciphertext& a, const Ciphertext& b) const {
  check(a);
  check(b);
  return Ciphertext{(a.value * b.value) % n2_, id_};
}

Ciphertext PaillierPublicKey::mul_plain(const Ciphertext& c, const mpz_class& k) const {
  check(c);
  mpz_class e = k % n_;
  if (e < 0) e += n_;
  return Ciphertext{powm(c.value, e, n2_), id_};
}

Ciphertext PaillierPublicKey::zero() const { return Ciphertext{mpz_class(1), id_}; }

void PaillierPublicKey::add_into(Ciphertext& acc, const Ciphertext& c) const {
  mpz_mul(acc.value.get_mpz_t(), acc.value.get_mpz_t(), c.value.get_mpz_t());
  mpz_mod(acc.value.get_mpz_t(), acc.value.get_mpz_t(), n2_.get_mpz_t());
}

Bytes PaillierPublicKey::serialize(const Ciphertext& c) const {
  check(c);
  const std::size_t width = ciphertext_bytes();
  Bytes out(width, 0);
  std::size_t count = 0;
  std::size_t used = (mpz_sizeinbase(c.value.get_mpz_t(), 2) + 7) / 8;
  if (c.value != 0) {
    mpz_export(out.data() + (width - used), &count, 1, 1, 1, 0, c.value.get_mpz_t());
  }
  return out;
}

Ciphertext PaillierPublicKey::deserialize(std::span<const std::uint8_t> bytes) const {
  if (bytes.size() != ciphertext_bytes()) throw ProtocolError("bad ciphertext width");
  mpz_class v;
  mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  if (v >= n2_) throw ProtocolError("ciphertext out of range");
  return Ciphertext{std::move(v), id_};
}

PaillierPrivateKey::PaillierPrivateKey(const mpz_class& p, const mpz_class& q)
    : pub_(p * q), p_(p), q_(q), p2_(p * p), q2_(q * q) {
  const mpz_class& n = pub_.n();
  mpz_class pm1 = p_ - 1, qm1 = q_ - 1;
  mpz_lcm(lambda_.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  // With g = n + 1, L(g^lambda mod n^2) = lambda mod n.
  mu_ = invert(lambda_ % n, n);

  mpz_class g = n + 1;
  hp_ = invert((powm(g, pm1, p2_) - 1) / p_, p_);
  hq_ = invert((powm(g, qm1, q2_) - 1) / q_, q_);
  q_inv_p_ = invert(q_, p_);
  q2_inv_p2_ = invert(q2_, p2_);
  n_mod_p2_phi_ = n % (p_ * pm1);
  n_mod_q2_phi_ = n % (q_ * qm1);
}

mpz_class PaillierPrivateKey::decrypt(const Ciphertext& c) const {
  if (c.key_id != pub_.id()) {
    throw ConfigError("ciphertext was produced under a different key");
  }
  mpz_class mp = ((powm(c.value % p2_, p_ - 1, p2_) - 1) / p_) * hp_ % p_;
  mpz_class mq = ((powm(c.value % q2_, q_ - 1, q2_) - 1) / q_) * hq_ % q_;
  mpz_class diff = (mp - mq) % p_;
  if (diff < 0) diff += p_;
  return mq + q_ * ((diff * q_inv_p_) % p_);
}

mpz_class PaillierPrivateKey::decrypt_textbook(const Ciphertext& c) const {
  if (c.key_id != pub_.id()) {
    throw ConfigError("ciphertext was produced under a different key");
  }
  const mpz_class& n = pub_.n();
  mpz_class u = powm(c.value, lambda_, pub_.n_squared());
  return ((u - 1) / n) * mu_ % n;
}

Ciphertext PaillierPrivateKey::encrypt(const mpz_class& m, RandomStream& rng) const {
  return encrypt_with(m, rng.unit_mod(pub_.n()));
}

Ciphertext PaillierPrivateKey::encrypt_with(const mpz_class& m, const mpz_class& r) const {
  const mpz_class& n = pub_.n();
  const mpz_class& n2 = pub_.n_squared();
  mpz_class xp = powm(r % p2_, n_mod_p2_phi_, p2_);
  mpz_class xq = powm(r % q2_, n_mod_q2_phi_, q2_);
  mpz_class diff = (xp - xq) % p2_;
  if (diff < 0) diff += p2_;
  mpz_class rn = xq + q2_ * ((diff * q2_inv_p2_) % p2_);
  mpz_class mm = m % n;
  if (mm < 0) mm += n;
  mpz_class c = ((1 + mm * n) % n2) * rn % n2;
  return Ciphertext{std::move(c), pub_.id()};
}

PaillierKeypair keygen(int bits, std::uint64_t seed) {
  if (bits != 512 && bits != 1024 && bits != 2048) {
    throw ConfigError("unsupported Paillier modulus size " + std::to_string(bits) +
                      " (expected 512, 1024 or 2048)");
  }
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed(mpz_class(std::to_string(derive_seed(seed, "paillier-keygen"))));
  mpz_class p = random_prime(rng, bits / 2);
  mpz_class q;
  do {
    q = random_prime(rng, bits / 2);
  } while (q == p);
  auto priv = std::make_shared<const PaillierPrivateKey>(p, q);
  return PaillierKeypair{priv->public_key(), priv};
}

std::int64_t FixedPointCodec::to_raw(double x) {
  double scaled = std::nearbyint(x * kScale);
  if (!(std::abs(scaled) < 9.2e18)) throw ConfigError("fixed-point value out of range");
  return static_cast<std::int64_t>(scaled);
}

mpz_class FixedPointCodec::encode_raw(__int128 raw) const {
  mpz_class v = to_mpz(raw);
  if (v < 0) v += n_;
  return v;
}

__int128 FixedPointCodec::decode_raw(const mpz_class& m) const {
  mpz_class v = m > half_ ? mpz_class(m - n_) : m;
  return to_int128(v);
}

mpz_class to_mpz(__int128 v) {
  bool negative = v < 0;
  unsigned __int128 mag = negative ? -static_cast<unsigned __int128>(v)
                                   : static_cast<unsigned __int128>(v);
  std::uint64_t words[2] = {static_cast<std::uint64_t>(mag),
                            static_cast<std::uint64_t>(mag >> 64)};
  mpz_class r;
  mpz_import(r.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, words);
  return negative ? mpz_class(-r) : r;
}

__int128 to_int128(const mpz_class& v) {
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > 126) throw Error("value exceeds 126 bits");
  std::uint64_t words[2] = {0, 0};
  std::size_t count = 0;
  mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, v.get_mpz_t());
  unsigned __int128 mag = (static_cast<unsigned __int128>(words[1]) << 64) | words[0];
  __int128 r = static_cast<__int128>(mag);
  return v < 0 ? -r : r;
}

}  // namespace starlit::he
