// Copyright 2026 The SparseDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPARSEDP_RNG_HPP_
#define SPARSEDP_RNG_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace sparsedp {

// SplitMix64 finalizer; used to spread seeds and derive sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Seeded random stream with deterministic, label-addressed forking.
//
// The determinism contract for the whole library is: the same seed and the
// same sequence of operations produce bit-identical results on every run.
// `fork` derives an independent child stream from (seed, label) only -- it
// does not consume randomness from the parent, and forking twice with the
// same label deliberately yields the same stream.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed)
      : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  RngHandle fork(std::string_view label) const {
    return RngHandle(splitmix64(seed_ ^ fnv1a64(label)));
  }

  RngHandle fork(std::uint64_t n) const {
    return RngHandle(splitmix64(seed_ ^ splitmix64(n ^ 0xa0761d6478bd642fULL)));
  }

  // Raw 64 random bits.
  std::uint64_t bits() { return engine_(); }

  // Uniform on the open interval (0,1).
  double u01() {
    double u;
    do {
      u = static_cast<double>(bits() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  // Uniform on the half-open interval (0,1]; never returns 0 so it is safe
  // as a divisor or as a priority-sampling rank.
  double u01_inclusive() {
    return static_cast<double>((bits() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngHandle::below: n must be > 0");
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  // Fair coin; true with probability 1/2.
  bool coin() { return (bits() >> 63) != 0; }

  // Underlying engine, for use with <random> distribution adaptors.
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sparsedp

#endif  // SPARSEDP_RNG_HPP_
