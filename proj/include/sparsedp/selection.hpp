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
// Closed-form selection laws for shortcut summarization.
//
// A summarization rule keeps a noisy cell value v with probability w(v):
//
//   filter (one-sided):   w(v) = 1{v >= theta}
//   filter (two-sided):   w(v) = 1{|v| >= theta}
//   threshold sampling:   w(v) = min(|v|/tau, 1)
//   filter + threshold:   w(v) = 1{|v| >= theta} * min(|v|/tau, 1)
//
// For a cell whose true count is zero, v is pure two-sided geometric noise,
// so the marginal inclusion probability p = E[w(X)] and the conditional law
// of v given inclusion both have closed forms. The shortcut algorithms never
// touch individual zero cells: they draw the number of included zero cells
// from Binomial(#zeros, p), pick that many locations uniformly, and draw
// each value from the conditional law. This file provides p, the conditional
// CDF, and exact samplers for it.
//
// Threshold sampling is the theta=0 boundary of filter+threshold (a cell
// with v=0 has zero weight either way), so the combined four-piece CDF is
// implemented once and reused.

#ifndef SPARSEDP_SELECTION_HPP_
#define SPARSEDP_SELECTION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "sparsedp/geometric.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

enum class SelectKind {
  filter_one_sided,
  filter_two_sided,
  threshold,
  filter_threshold,
};

inline std::string to_string(SelectKind k) {
  switch (k) {
    case SelectKind::filter_one_sided: return "filter-one-sided";
    case SelectKind::filter_two_sided: return "filter-two-sided";
    case SelectKind::threshold: return "threshold";
    case SelectKind::filter_threshold: return "filter-threshold";
  }
  throw std::logic_error("unreachable");
}

namespace detail {

// g(j) = alpha^j * (j*(1-alpha) + alpha). Partial sums of j*alpha^j
// telescope through it: (1-alpha)^2 * sum_{j=a}^{b} j*alpha^j = g(a)-g(b+1),
// which keeps the four-piece CDF free of catastrophic cancellation even when
// alpha is close to 1 (dyadic sensitivities).
inline double weighted_tail(const NoiseSpec& s, double j) {
  return s.pow_alpha(j) * (j * s.one_minus_pow_alpha(1.0) + s.alpha);
}

// Normalizing mass D(theta,tau) = g(theta) - alpha^(tau+1), factored to
// avoid cancellation: inclusion probability is 2D/(tau*(1-alpha^2)) and the
// conditional CDF scale is C = 1/(2D). Defined for 0 <= theta <= tau.
inline double combined_mass(const NoiseSpec& s, std::int64_t theta,
                            std::int64_t tau) {
  double th = static_cast<double>(theta);
  return s.pow_alpha(th) *
         (th * s.one_minus_pow_alpha(1.0) +
          s.alpha * s.one_minus_pow_alpha(static_cast<double>(tau - theta)));
}

}  // namespace detail

// Raw closed form for the combined rule, defined on the full parameter range
// 0 <= theta <= tau (the boundary theta=tau degenerates to a pure two-sided
// filter at theta). The public inclusion_probability below enforces the
// stricter operational precondition theta < tau.
inline double combined_pass_probability(const NoiseSpec& s, std::int64_t theta,
                                        std::int64_t tau) {
  if (theta < 0 || tau < 1 || theta > tau)
    throw std::invalid_argument("combined_pass_probability: need 0 <= theta <= tau, tau >= 1");
  return 2.0 * detail::combined_mass(s, theta, tau) /
         (static_cast<double>(tau) * s.one_minus_pow_alpha(2.0));
}

inline void validate_selection(SelectKind kind, std::int64_t theta,
                               std::int64_t tau) {
  switch (kind) {
    case SelectKind::filter_one_sided:
    case SelectKind::filter_two_sided:
      if (theta < 1)
        throw std::invalid_argument("filter: theta must be a positive integer");
      return;
    case SelectKind::threshold:
      if (tau < 1)
        throw std::invalid_argument("threshold: tau must be a positive integer");
      return;
    case SelectKind::filter_threshold:
      if (tau < 1 || theta < 0 || theta >= tau)
        throw std::invalid_argument(
            "filter-threshold: need 0 <= theta < tau, tau >= 1");
      return;
  }
  throw std::logic_error("unreachable");
}

// Marginal probability that a true-zero cell is included in the summary.
inline double inclusion_probability(SelectKind kind, const NoiseSpec& s,
                                    std::int64_t theta = 0,
                                    std::int64_t tau = 0) {
  validate_selection(kind, theta, tau);
  switch (kind) {
    case SelectKind::filter_one_sided:
      return s.pow_alpha(static_cast<double>(theta)) / (1.0 + s.alpha);
    case SelectKind::filter_two_sided:
      return 2.0 * s.pow_alpha(static_cast<double>(theta)) / (1.0 + s.alpha);
    case SelectKind::threshold:
      return combined_pass_probability(s, 0, tau);
    case SelectKind::filter_threshold:
      return combined_pass_probability(s, theta, tau);
  }
  throw std::logic_error("unreachable");
}

// Law of a true-zero cell's released value conditioned on inclusion.
// Construct once per summarization run; cdf() and sample() are cheap.
class ConditionalValueLaw {
 public:
  ConditionalValueLaw(SelectKind kind, const NoiseSpec& s, std::int64_t theta,
                      std::int64_t tau)
      : kind_(kind), spec_(s), theta_(theta), tau_(tau) {
    validate_selection(kind, theta, tau);
    if (kind == SelectKind::threshold) {
      kind_ = SelectKind::filter_threshold;  // shared four-piece law
      theta_ = 0;
    }
    theta_eff_ = std::max<std::int64_t>(theta_, 1);
    if (kind_ == SelectKind::filter_threshold)
      scale_ = 0.5 / detail::combined_mass(spec_, theta_, tau_);
  }

  SelectKind kind() const { return kind_; }

  // Pr[value <= nu | included].
  double cdf(std::int64_t nu) const {
    const NoiseSpec& s = spec_;
    switch (kind_) {
      case SelectKind::filter_one_sided:
        if (nu < theta_) return 0.0;
        return s.one_minus_pow_alpha(static_cast<double>(nu - theta_ + 1));
      case SelectKind::filter_two_sided:
        if (nu <= -theta_)
          return 0.5 * s.pow_alpha(static_cast<double>(-nu - theta_));
        if (nu < theta_) return 0.5;
        return 1.0 -
               0.5 * s.pow_alpha(static_cast<double>(nu - theta_ + 1));
      case SelectKind::filter_threshold: {
        if (nu <= -theta_eff_ || (theta_ == 0 && nu <= 0)) {
          double k = static_cast<double>(-nu);
          if (-nu > tau_)
            return static_cast<double>(tau_) * scale_ *
                   s.one_minus_pow_alpha(1.0) * s.pow_alpha(k);
          return scale_ * s.pow_alpha(k) *
                 (k * s.one_minus_pow_alpha(1.0) +
                  s.alpha *
                      s.one_minus_pow_alpha(static_cast<double>(tau_ + nu)));
        }
        if (nu < theta_eff_) return 0.5;  // no mass in (-theta, theta)
        if (nu <= tau_)
          return 0.5 + scale_ * (detail::weighted_tail(s, static_cast<double>(theta_eff_)) -
                                 detail::weighted_tail(s, static_cast<double>(nu + 1)));
        return 1.0 - static_cast<double>(tau_) * scale_ *
                         s.one_minus_pow_alpha(1.0) *
                         s.pow_alpha(static_cast<double>(nu + 1));
      }
      case SelectKind::threshold:
        break;  // rewritten to filter_threshold in the constructor
    }
    throw std::logic_error("unreachable");
  }

  std::int64_t sample(RngHandle& rng) const {
    switch (kind_) {
      case SelectKind::filter_one_sided:
        return sample_one_sided_magnitude(rng);
      case SelectKind::filter_two_sided: {
        std::int64_t mag = sample_one_sided_magnitude(rng);
        return rng.coin() ? mag : -mag;
      }
      case SelectKind::filter_threshold: {
        std::int64_t mag = sample_combined_magnitude(rng);
        return rng.coin() ? mag : -mag;
      }
      case SelectKind::threshold:
        break;
    }
    throw std::logic_error("unreachable");
  }

 private:
  // Inverse transform for Pr[X <= x | X >= theta] = 1 - alpha^(x-theta+1):
  // closed-form index plus +-1 fix-ups (exact generalized inverse).
  std::int64_t sample_one_sided_magnitude(RngHandle& rng) const {
    const double u = rng.u01();
    double t = std::log1p(-u) / spec_.ln_alpha;  // alpha^(x-theta+1) <= 1-u
    std::int64_t x = theta_ - 1 + static_cast<std::int64_t>(std::ceil(t));
    if (x < theta_) x = theta_;
    while (one_sided_cdf(x) < u) ++x;
    while (x > theta_ && one_sided_cdf(x - 1) >= u) --x;
    return x;
  }

  double one_sided_cdf(std::int64_t x) const {
    return spec_.one_minus_pow_alpha(static_cast<double>(x - theta_ + 1));
  }

  // Magnitude law under the combined rule: Pr[|X| <= j | included] =
  // 2*cdf(j) - 1 for j >= max(theta,1), by symmetry. The geometric tail
  // above tau inverts in closed form; the body is a binary search over the
  // monotone CDF.
  std::int64_t sample_combined_magnitude(RngHandle& rng) const {
    const double u = rng.u01();
    auto mag_cdf = [this](std::int64_t j) { return 2.0 * cdf(j) - 1.0; };
    if (u > mag_cdf(tau_)) {
      // 1 - 2*tau*C*(1-alpha)*alpha^(j+1) >= u
      double rhs = (1.0 - u) / (2.0 * static_cast<double>(tau_) * scale_ *
                                spec_.one_minus_pow_alpha(1.0));
      std::int64_t j =
          static_cast<std::int64_t>(std::ceil(std::log(rhs) / spec_.ln_alpha)) - 1;
      if (j < tau_ + 1) j = tau_ + 1;
      while (mag_cdf(j) < u) ++j;
      while (j > tau_ + 1 && mag_cdf(j - 1) >= u) --j;
      return j;
    }
    std::int64_t lo = theta_eff_, hi = tau_;  // smallest j with mag_cdf(j) >= u
    while (lo < hi) {
      std::int64_t mid = lo + (hi - lo) / 2;
      if (mag_cdf(mid) >= u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

  SelectKind kind_;
  NoiseSpec spec_;
  std::int64_t theta_;
  std::int64_t tau_;
  std::int64_t theta_eff_ = 1;
  double scale_ = 0.0;  // C = 1/(2*D), combined kinds only
};

inline double conditional_value_cdf(SelectKind kind, const NoiseSpec& s,
                                    std::int64_t theta, std::int64_t tau,
                                    std::int64_t nu) {
  return ConditionalValueLaw(kind, s, theta, tau).cdf(nu);
}

inline std::int64_t sample_conditional(SelectKind kind, const NoiseSpec& s,
                                       std::int64_t theta, std::int64_t tau,
                                       RngHandle& rng) {
  return ConditionalValueLaw(kind, s, theta, tau).sample(rng);
}

// Uniform sample of k distinct true-zero cell locations, in time roughly
// proportional to k (plus O(m) only when k is a constant fraction of all
// zero cells, in which case the output is of that size anyway).
inline std::vector<std::uint64_t> select_zero_locations(const SparseTable& t,
                                                        std::uint64_t k,
                                                        RngHandle& rng) {
  const std::uint64_t zeros = t.m() - t.nonzero_count();
  if (k > zeros)
    throw std::invalid_argument("select_zero_locations: k exceeds zero-cell count");
  std::vector<std::uint64_t> out;
  if (k == 0) return out;
  out.reserve(static_cast<std::size_t>(k));

  if (k < zeros / 2) {
    // Rejection against the (sparse) nonzero set; acceptance >= 1/2 per try.
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(static_cast<std::size_t>(k) * 2);
    while (out.size() < k) {
      std::uint64_t i = rng.below(t.m());
      if (t.count_at(i) != 0) continue;
      if (!seen.insert(i).second) continue;
      out.push_back(i);
    }
    return out;
  }

  // Dense regime: materialize the zero set once and subsample it.
  std::vector<std::uint64_t> zero_cells;
  zero_cells.reserve(static_cast<std::size_t>(zeros));
  auto it = t.entries().begin();
  for (std::uint64_t i = 0; i < t.m(); ++i) {
    if (it != t.entries().end() && it->index == i) {
      ++it;
      continue;
    }
    zero_cells.push_back(i);
  }
  if (k == zeros) return zero_cells;
  for (std::uint64_t pos : detail::sample_without_replacement(zeros, k, rng))
    out.push_back(zero_cells[static_cast<std::size_t>(pos)]);
  return out;
}

}  // namespace sparsedp

#endif  // SPARSEDP_SELECTION_HPP_
