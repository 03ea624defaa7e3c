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
// Brute-force reference for the closed-form selection laws.
//
// Deliberately independent of selection.hpp: it recomputes alpha from
// (epsilon, sensitivity) on its own, enumerates the geometric pmf term by
// term in extended precision, and applies the selection weight literally.
// Agreement between this enumeration and the closed forms is what certifies
// them.

#ifndef SPARSEDP_ORACLE_HPP_
#define SPARSEDP_ORACLE_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sparsedp/selection.hpp"

namespace sparsedp {

struct BruteProbability {
  double inclusion = 0.0;       // marginal Pr[zero cell included]
  std::int64_t support_lo = 0;  // value carried by pmf[0]
  std::vector<double> pmf;      // conditional pmf over consecutive values

  double pmf_at(std::int64_t v) const {
    std::int64_t off = v - support_lo;
    if (off < 0 || off >= static_cast<std::int64_t>(pmf.size())) return 0.0;
    return pmf[static_cast<std::size_t>(off)];
  }

  // Conditional CDF by summation from the bottom of the enumeration.
  double cdf(std::int64_t v) const {
    if (v < support_lo) return 0.0;
    long double acc = 0.0L;
    std::int64_t top = std::min<std::int64_t>(
        v, support_lo + static_cast<std::int64_t>(pmf.size()) - 1);
    for (std::int64_t x = support_lo; x <= top; ++x)
      acc += pmf[static_cast<std::size_t>(x - support_lo)];
    return static_cast<double>(acc);
  }
};

inline BruteProbability brute_probability(SelectKind kind, double epsilon,
                                          std::int64_t sensitivity,
                                          std::int64_t theta, std::int64_t tau,
                                          double tail_mass = 1e-16) {
  if (!(epsilon > 0.0) || sensitivity < 1)
    throw std::invalid_argument("brute_probability: bad privacy parameters");
  const long double a =
      std::exp(static_cast<long double>(-epsilon) /
               static_cast<long double>(sensitivity));

  auto weight = [&](std::int64_t v) -> long double {
    std::int64_t mag = v < 0 ? -v : v;
    switch (kind) {
      case SelectKind::filter_one_sided:
        return v >= theta ? 1.0L : 0.0L;
      case SelectKind::filter_two_sided:
        return mag >= theta ? 1.0L : 0.0L;
      case SelectKind::threshold:
        return std::min(static_cast<long double>(mag) / tau, 1.0L);
      case SelectKind::filter_threshold:
        if (mag < theta) return 0.0L;
        return std::min(static_cast<long double>(mag) / tau, 1.0L);
    }
    throw std::logic_error("unreachable");
  };

  // Enumerate until the remaining two-sided tail is below tail_mass.
  std::int64_t cap = static_cast<std::int64_t>(std::ceil(
      std::log(static_cast<double>(tail_mass) * (1.0 + static_cast<double>(a)) / 2.0) /
      std::log(static_cast<double>(a))));
  cap = std::max<std::int64_t>(cap, std::max<std::int64_t>(theta, tau) + 64);
  if (cap > (std::int64_t{1} << 22))
    throw std::invalid_argument("brute_probability: support too wide to enumerate");

  const long double pmf0 = (1.0L - a) / (1.0L + a);
  std::vector<long double> mass(static_cast<std::size_t>(2 * cap + 1));
  long double inclusion = 0.0L;
  for (std::int64_t v = -cap; v <= cap; ++v) {
    std::int64_t mag = v < 0 ? -v : v;
    long double p = pmf0 * std::pow(a, static_cast<long double>(mag));
    long double wm = weight(v) * p;
    mass[static_cast<std::size_t>(v + cap)] = wm;
    inclusion += wm;
  }
  if (inclusion <= 0.0L)
    throw std::logic_error("brute_probability: selection has zero mass");

  BruteProbability out;
  out.inclusion = static_cast<double>(inclusion);
  std::int64_t lo = -cap, hi = cap;
  while (lo < hi && mass[static_cast<std::size_t>(lo + cap)] == 0.0L) ++lo;
  while (hi > lo && mass[static_cast<std::size_t>(hi + cap)] == 0.0L) --hi;
  out.support_lo = lo;
  out.pmf.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t v = lo; v <= hi; ++v)
    out.pmf.push_back(static_cast<double>(
        mass[static_cast<std::size_t>(v + cap)] / inclusion));
  return out;
}

}  // namespace sparsedp

#endif  // SPARSEDP_ORACLE_HPP_
