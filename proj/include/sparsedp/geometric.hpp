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
// Two-sided geometric noise for epsilon-differential privacy.
//
// The mechanism adds integer noise X with
//
//     Pr[X = x] = (1-alpha)/(1+alpha) * alpha^|x|,   alpha = e^(-eps/Delta),
//
// to every cell of a histogram with per-record sensitivity Delta. Moments:
// E[X] = 0, E[|X|] = 2*alpha/(1-alpha^2), Var[X] = 2*alpha/(1-alpha)^2.

#ifndef SPARSEDP_GEOMETRIC_HPP_
#define SPARSEDP_GEOMETRIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sparsedp/rng.hpp"

namespace sparsedp {

// Privacy noise parameters. alpha is always derived from (epsilon,
// sensitivity); callers never supply it directly.
struct NoiseSpec {
  double epsilon = 0.0;
  std::int64_t sensitivity = 1;
  double alpha = 0.0;     // e^(-epsilon/sensitivity), in (0,1)
  double ln_alpha = 0.0;  // -epsilon/sensitivity, cached for pow_alpha

  static NoiseSpec make(double epsilon, std::int64_t sensitivity = 1) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("NoiseSpec: epsilon must be finite and > 0");
    if (sensitivity < 1)
      throw std::invalid_argument("NoiseSpec: sensitivity must be >= 1");
    NoiseSpec s;
    s.epsilon = epsilon;
    s.sensitivity = sensitivity;
    s.ln_alpha = -epsilon / static_cast<double>(sensitivity);
    s.alpha = std::exp(s.ln_alpha);
    if (!(s.alpha > 0.0 && s.alpha < 1.0))
      throw std::invalid_argument("NoiseSpec: alpha out of (0,1); epsilon too extreme");
    return s;
  }

  // alpha^k, valid for fractional k; computed in log space so large k does
  // not lose precision to repeated multiplication.
  double pow_alpha(double k) const { return std::exp(k * ln_alpha); }

  // 1 - alpha^k via expm1, accurate when alpha is close to 1 (small epsilon
  // or large sensitivity, e.g. dyadic transforms).
  double one_minus_pow_alpha(double k) const { return -std::expm1(k * ln_alpha); }

  double mean_abs_noise() const {
    return 2.0 * alpha / one_minus_pow_alpha(2.0);
  }

  double noise_variance() const {
    double om = one_minus_pow_alpha(1.0);
    return 2.0 * alpha / (om * om);
  }
};

inline double geom_pmf(const NoiseSpec& s, std::int64_t x) {
  double k = static_cast<double>(x < 0 ? -x : x);
  return s.one_minus_pow_alpha(1.0) / (1.0 + s.alpha) * s.pow_alpha(k);
}

// Pr[X <= x]. Closed form: for x < 0 it is alpha^(-x)/(1+alpha); for x >= 0
// it is 1 - alpha^(x+1)/(1+alpha).
inline double geom_cdf(const NoiseSpec& s, std::int64_t x) {
  if (x < 0) return s.pow_alpha(static_cast<double>(-x)) / (1.0 + s.alpha);
  return 1.0 - s.pow_alpha(static_cast<double>(x + 1)) / (1.0 + s.alpha);
}

// One two-sided geometric draw by closed-form inversion of the CDF. The
// analytic index is followed by +-1 fix-up steps so the result is the exact
// generalized inverse even when the log/exp round trip lands on a boundary.
inline std::int64_t sample_geometric(const NoiseSpec& s, RngHandle& rng) {
  const double u = rng.u01();
  const double neg_mass = s.alpha / (1.0 + s.alpha);  // Pr[X <= -1]
  std::int64_t x;
  if (u <= neg_mass) {
    // Smallest x (x <= -1) with alpha^(-x)/(1+alpha) >= u.
    double t = std::log(u * (1.0 + s.alpha)) / s.ln_alpha;
    x = -static_cast<std::int64_t>(std::floor(t));
    while (geom_cdf(s, x) < u) ++x;
    while (geom_cdf(s, x - 1) >= u) --x;
    if (x > -1) x = -1;
  } else if (u <= 1.0 - s.alpha / (1.0 + s.alpha)) {
    // geom_cdf(s, 0) = 1 - alpha/(1+alpha) = 1/(1+alpha).
    x = 0;
  } else {
    // Smallest x >= 1 with alpha^(x+1) <= (1-u)(1+alpha).
    double t = std::log((1.0 - u) * (1.0 + s.alpha)) / s.ln_alpha - 1.0;
    x = static_cast<std::int64_t>(std::ceil(t));
    if (x < 1) x = 1;
    while (geom_cdf(s, x) < u) ++x;
    while (x > 1 && geom_cdf(s, x - 1) >= u) --x;
  }
  return x;
}

// Bulk sampler: tabulated inverse CDF. The table covers [-cap, cap] where
// cap is chosen so that the omitted two-sided tail mass is below 2^-60;
// since uniform variates carry 53 random bits they can never select the
// omitted tail, so draws are clamped to +-cap without distortion. For very
// small epsilon/sensitivity ratios the table is capped at 2^22 entries
// (tail mass then bounded by the table edge, still astronomically small).
class GeometricSampler {
 public:
  explicit GeometricSampler(const NoiseSpec& s) : spec_(s) {
    // Smallest cap with 2*alpha^(cap+1)/(1+alpha) < 2^-60.
    double need = (std::log(0x1.0p-60) + std::log1p(s.alpha) - std::log(2.0)) /
                      s.ln_alpha -
                  1.0;
    cap_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(need)));
    cap_ = std::min<std::int64_t>(cap_, (1 << 21));
    cdf_.resize(static_cast<std::size_t>(2 * cap_ + 1));
    for (std::int64_t x = -cap_; x <= cap_; ++x)
      cdf_[static_cast<std::size_t>(x + cap_)] = geom_cdf(s, x);
  }

  std::int64_t operator()(RngHandle& rng) const {
    const double u = rng.u01();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return cap_;
    return static_cast<std::int64_t>(it - cdf_.begin()) - cap_;
  }

  std::int64_t cap() const { return cap_; }
  const NoiseSpec& spec() const { return spec_; }

 private:
  NoiseSpec spec_;
  std::int64_t cap_;
  std::vector<double> cdf_;
};

// Exact Binomial(trials, p) draw. Delegates to the standard library's
// binomial distribution (exact inversion / rejection, not a normal
// approximation); edge cases handled explicitly so p on the boundary is
// deterministic.
inline std::int64_t sample_binomial(std::int64_t trials, double p,
                                    RngHandle& rng) {
  if (trials < 0) throw std::invalid_argument("sample_binomial: trials < 0");
  if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("sample_binomial: p must be in [0,1]");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  return std::binomial_distribution<std::int64_t>(trials, p)(rng.engine());
}

inline std::int64_t clamp_nonnegative(std::int64_t v) { return v < 0 ? 0 : v; }

}  // namespace sparsedp

#endif  // SPARSEDP_GEOMETRIC_HPP_
