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

#ifndef STARLIT_COMMON_H_
#define STARLIT_COMMON_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace starlit {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or invalid arguments supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A two-party or multi-party exchange could not complete.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// The mechanism LP (or its caps) admits no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

using Bytes = std::vector<std::uint8_t>;

// SplitMix64 finalizer. Used to derive independent sub-seeds from a master
// seed so every stage of a run is reproducible in isolation.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return mix_seed(master ^ mix_seed(h));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index) {
  return mix_seed(derive_seed(master, tag) + mix_seed(index));
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
template <typename Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Little-endian byte serialization used for every simulated wire message.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { out_.push_back(v); }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_raw(std::span<const std::uint8_t> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }
  void put_string(std::string_view s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  Bytes take() { return std::move(out_); }
  std::size_t size() const { return out_.size(); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t get_u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::span<const std::uint8_t> get_raw(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::string get_string() {
    std::uint32_t n = get_u32();
    auto s = get_raw(n);
    return std::string(s.begin(), s.end());
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ProtocolError("truncated message");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace starlit

#endif  // STARLIT_COMMON_H_
