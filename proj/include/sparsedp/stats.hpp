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
// Statistical tests for the verification harness. All tests work on
// value -> count histograms so that millions of integer samples can be
// compared without materializing them.

#ifndef SPARSEDP_STATS_HPP_
#define SPARSEDP_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace sparsedp {

using CountHistogram = std::map<std::int64_t, std::uint64_t>;

inline void add_sample(CountHistogram& h, std::int64_t v) { ++h[v]; }

// Upper tail of the chi-squared distribution.
inline double chi2_sf(double stat, double dof) {
  if (dof <= 0.0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, stat)));
}

// Asymptotic Kolmogorov upper tail Q(lambda) = 2*sum_j (-1)^(j-1) e^(-2 j^2
// lambda^2).
inline double kolmogorov_sf(double lambda) {
  if (lambda < 0.18) return 1.0;  // series converges slowly; tail is ~1 here
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 128; ++j) {
    double term = std::exp(-2.0 * lambda * lambda * j * j);
    sum += sign * term;
    if (term < 1e-14) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
  double stat = 0.0;     // sup |F1 - F2|
  double p_value = 1.0;  // asymptotic two-sample tail
  std::uint64_t n1 = 0, n2 = 0;
};

inline KsResult ks_two_sample(const CountHistogram& a, const CountHistogram& b) {
  KsResult r;
  for (const auto& [v, c] : a) r.n1 += c;
  for (const auto& [v, c] : b) r.n2 += c;
  if (r.n1 == 0 || r.n2 == 0) return r;  // nothing to compare
  auto ia = a.begin();
  auto ib = b.begin();
  std::uint64_t ca = 0, cb = 0;
  double d = 0.0;
  while (ia != a.end() || ib != b.end()) {
    std::int64_t v;
    if (ib == b.end() || (ia != a.end() && ia->first <= ib->first)) {
      v = ia->first;
    } else {
      v = ib->first;
    }
    while (ia != a.end() && ia->first == v) ca += (ia++)->second;
    while (ib != b.end() && ib->first == v) cb += (ib++)->second;
    double fa = static_cast<double>(ca) / static_cast<double>(r.n1);
    double fb = static_cast<double>(cb) / static_cast<double>(r.n2);
    d = std::max(d, std::abs(fa - fb));
  }
  r.stat = d;
  double ne = static_cast<double>(r.n1) * static_cast<double>(r.n2) /
              static_cast<double>(r.n1 + r.n2);
  double sq = std::sqrt(ne);
  r.p_value = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

struct Chi2Result {
  double stat = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

// Two-sample chi-squared over integer histograms. Adjacent values are pooled
// until each bin holds at least `min_pooled` combined observations, which
// keeps the chi-squared approximation honest in the tails.
inline Chi2Result chi_square_two_sample(const CountHistogram& a,
                                        const CountHistogram& b,
                                        double min_pooled = 10.0) {
  CountHistogram merged = a;
  for (const auto& [v, c] : b) merged[v] += c;
  struct Bin {
    std::uint64_t count_a = 0, count_b = 0;
  };
  std::vector<Bin> bins;
  Bin cur;
  std::uint64_t pooled = 0;
  for (const auto& [v, c] : merged) {
    auto ita = a.find(v);
    auto itb = b.find(v);
    cur.count_a += ita == a.end() ? 0 : ita->second;
    cur.count_b += itb == b.end() ? 0 : itb->second;
    pooled += c;
    if (static_cast<double>(pooled) >= min_pooled) {
      bins.push_back(cur);
      cur = Bin{};
      pooled = 0;
    }
  }
  if (pooled > 0) {
    if (bins.empty()) {
      bins.push_back(cur);
    } else {
      bins.back().count_a += cur.count_a;  // fold the short tail backward
      bins.back().count_b += cur.count_b;
    }
  }

  Chi2Result r;
  r.bins = bins.size();
  if (bins.size() < 2) return r;  // identical/degenerate: no evidence against
  double na = 0.0, nb = 0.0;
  for (const Bin& bin : bins) {
    na += static_cast<double>(bin.count_a);
    nb += static_cast<double>(bin.count_b);
  }
  if (na == 0.0 || nb == 0.0) return r;
  const double n = na + nb;
  for (const Bin& bin : bins) {
    double col = static_cast<double>(bin.count_a + bin.count_b);
    double ea = na * col / n;
    double eb = nb * col / n;
    double da = static_cast<double>(bin.count_a) - ea;
    double db = static_cast<double>(bin.count_b) - eb;
    r.stat += da * da / ea + db * db / eb;
  }
  r.dof = static_cast<double>(bins.size() - 1);
  r.p_value = chi2_sf(r.stat, r.dof);
  return r;
}

// Goodness-of-fit chi-squared of an observed integer histogram against a
// reference CDF evaluated on [support_lo, support_hi]; mass outside that
// window is folded into the edge bins. Bins are grown until the expected
// count reaches `min_expected`.
inline Chi2Result chi_square_gof(const CountHistogram& observed,
                                 const std::function<double(std::int64_t)>& cdf,
                                 std::int64_t support_lo,
                                 std::int64_t support_hi,
                                 double min_expected = 8.0) {
  if (support_lo > support_hi)
    throw std::invalid_argument("chi_square_gof: empty support window");
  double n = 0.0;
  for (const auto& [v, c] : observed) n += static_cast<double>(c);
  if (n == 0.0) return {};

  struct Bin {
    double expected = 0.0;
    std::uint64_t obs = 0;
  };
  std::vector<Bin> bins;
  Bin cur;
  auto it = observed.begin();
  double prev_cdf = 0.0;  // lower tail folds into the first bin
  for (std::int64_t v = support_lo; v <= support_hi; ++v) {
    double f = v == support_hi ? 1.0 : cdf(v);  // upper tail into last bin
    cur.expected += (f - prev_cdf) * n;
    prev_cdf = f;
    while (it != observed.end() && it->first <= v) cur.obs += (it++)->second;
    if (cur.expected >= min_expected && v != support_hi) {
      bins.push_back(cur);
      cur = Bin{};
    }
  }
  while (it != observed.end()) cur.obs += (it++)->second;
  if (bins.empty() || cur.expected >= min_expected) {
    bins.push_back(cur);
  } else {
    bins.back().expected += cur.expected;
    bins.back().obs += cur.obs;
  }

  Chi2Result r;
  r.bins = bins.size();
  if (bins.size() < 2) return r;
  for (const Bin& bin : bins) {
    double d = static_cast<double>(bin.obs) - bin.expected;
    r.stat += d * d / bin.expected;
  }
  r.dof = static_cast<double>(bins.size() - 1);
  r.p_value = chi2_sf(r.stat, r.dof);
  return r;
}

struct MeanVar {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const {  // sample variance
    return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1);
  }
  double stderr_mean() const {
    return n < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n));
  }
};

}  // namespace sparsedp

#endif  // SPARSEDP_STATS_HPP_
