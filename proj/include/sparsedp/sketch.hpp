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
//
// Privacy-protected count sketch.
//
// A d x w count sketch with pairwise-independent bucket hashes h_j and sign
// hashes g_j stores sum_i g_j(i) * M(i) per bucket. One record moves one
// bucket per row by +-1, and a record's presence/absence changes at most 2d
// bucket values in L1, so adding two-sided geometric noise with sensitivity
// 2*d to every bucket gives epsilon-differential privacy for the whole
// sketch. Point estimates g_j(i) * B[j][h_j(i)] are unbiased per row; rows
// combine by mean or median. Estimator variance splits into a collision term
// ~ ||M||_2^2 / (w*d) (mean combine) shrinking in w, and a noise term
// growing with d because the per-bucket noise scale is d/epsilon -- so w
// buys accuracy and d trades robustness against privacy noise.

#ifndef SPARSEDP_SKETCH_HPP_
#define SPARSEDP_SKETCH_HPP_

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sparsedp/geometric.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

namespace detail {

inline constexpr std::uint64_t kHashPrime = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t mulmod_prime(std::uint64_t a, std::uint64_t x,
                                  std::uint64_t b) {
  unsigned __int128 t = static_cast<unsigned __int128>(a) * x + b;
  return static_cast<std::uint64_t>(t % kHashPrime);
}

}  // namespace detail

enum class SketchCombine { mean, median };

inline std::string to_string(SketchCombine c) {
  return c == SketchCombine::mean ? "mean" : "median";
}

struct PrivateSketch {
  std::uint32_t width = 0;
  std::uint32_t depth = 0;
  std::uint64_t m = 0;         // domain the sketch was built over
  double base_epsilon = 0.0;   // budget for the whole release
  NoiseSpec noise;             // derived: sensitivity scaled by 2*depth
  std::vector<std::uint64_t> hash_a, hash_b;  // bucket hash, per row
  std::vector<std::uint64_t> sign_a, sign_b;  // sign hash, per row
  std::vector<std::int64_t> buckets;          // row-major depth x width

  std::uint32_t bucket_of(std::uint32_t row, std::uint64_t i) const {
    return static_cast<std::uint32_t>(
        detail::mulmod_prime(hash_a[row], i, hash_b[row]) % width);
  }

  // +1 or -1, pairwise independent across cells.
  std::int64_t sign_of(std::uint32_t row, std::uint64_t i) const {
    return (detail::mulmod_prime(sign_a[row], i, sign_b[row]) & 1) ? 1 : -1;
  }
};

inline PrivateSketch build_private_sketch(const SparseTable& t,
                                          std::uint32_t width,
                                          std::uint32_t depth,
                                          const NoiseSpec& base,
                                          RngHandle& rng) {
  if (width == 0 || depth == 0)
    throw std::invalid_argument("build_private_sketch: width and depth >= 1");
  PrivateSketch sk;
  sk.width = width;
  sk.depth = depth;
  sk.m = t.m();
  sk.base_epsilon = base.epsilon;
  sk.noise = NoiseSpec::make(
      base.epsilon, base.sensitivity * static_cast<std::int64_t>(2 * depth));
  for (std::uint32_t j = 0; j < depth; ++j) {
    sk.hash_a.push_back(1 + rng.below(detail::kHashPrime - 1));
    sk.hash_b.push_back(rng.below(detail::kHashPrime));
    sk.sign_a.push_back(1 + rng.below(detail::kHashPrime - 1));
    sk.sign_b.push_back(rng.below(detail::kHashPrime));
  }
  sk.buckets.assign(static_cast<std::size_t>(width) * depth, 0);
  for (const CellEntry& c : t.entries())
    for (std::uint32_t j = 0; j < depth; ++j)
      sk.buckets[static_cast<std::size_t>(j) * width + sk.bucket_of(j, c.index)] +=
          sk.sign_of(j, c.index) * c.count;
  GeometricSampler noise(sk.noise);
  for (std::int64_t& b : sk.buckets) b += noise(rng);
  return sk;
}

inline double sketch_point_estimate(const PrivateSketch& sk, std::uint64_t i,
                                    SketchCombine combine) {
  if (i >= sk.m)
    throw std::out_of_range("sketch_point_estimate: index outside domain");
  std::vector<double> per_row(sk.depth);
  for (std::uint32_t j = 0; j < sk.depth; ++j) {
    const std::int64_t b =
        sk.buckets[static_cast<std::size_t>(j) * sk.width + sk.bucket_of(j, i)];
    per_row[j] = static_cast<double>(sk.sign_of(j, i) * b);
  }
  if (combine == SketchCombine::mean) {
    double s = 0.0;
    for (double v : per_row) s += v;
    return s / static_cast<double>(sk.depth);
  }
  std::sort(per_row.begin(), per_row.end());
  const std::size_t d = per_row.size();
  return d % 2 == 1 ? per_row[d / 2]
                    : 0.5 * (per_row[d / 2 - 1] + per_row[d / 2]);
}

}  // namespace sparsedp

#endif  // SPARSEDP_SKETCH_HPP_
