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
// Shortcut summarization algorithms.
//
// The naive ("laborious") way to release a noisy sparse table is to add
// geometric noise to every one of the m cells and then select survivors;
// that costs O(m) even when the output has only a few thousand entries. The
// shortcut algorithms here produce output with exactly the same distribution
// in time proportional to the number of nonzero inputs plus the number of
// released entries: nonzero cells are noised individually, while the
// (m - n) zero cells are handled in bulk through the closed-form laws in
// selection.hpp -- a Binomial draw for how many get upgraded, a uniform draw
// for where, and the conditional value law for what value they carry.
//
// laborious_path() implements the naive pipeline directly (for verification
// and benchmarking); equivalence of the two paths is the library's central
// correctness property.

#ifndef SPARSEDP_SUMMARIZE_HPP_
#define SPARSEDP_SUMMARIZE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedp/geometric.hpp"
#include "sparsedp/selection.hpp"
#include "sparsedp/summary.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

// Verification-only hooks that deliberately perturb the sampling laws, used
// to confirm that the statistical equivalence tests have the power to catch
// an implementation bug. Production code paths always pass the defaults.
struct ShortcutTweaks {
  double zero_inclusion_scale = 1.0;  // multiplies the zero-cell inclusion p
};

// One candidate in a priority sample: rank r ~ U(0,1] and priority |v|/r.
struct PriorityDraw {
  std::uint64_t index = 0;
  std::int64_t value = 0;
  double rank = 0.0;
  double priority = 0.0;
  EntryOrigin origin = EntryOrigin::nonzero;
};

struct PrioritySelection {
  std::vector<PriorityDraw> top;  // exactly s draws, highest priorities
  double tau_s = 0.0;             // the (s+1)-th largest priority
};

// Selects the s highest-priority draws (ties broken by lower index) and the
// (s+1)-th priority that becomes the weight floor tau_s.
inline PrioritySelection select_top_priorities(std::vector<PriorityDraw> pool,
                                               std::size_t s) {
  if (pool.size() < s + 1)
    throw std::invalid_argument("select_top_priorities: pool smaller than s+1");
  auto higher = [](const PriorityDraw& a, const PriorityDraw& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.index < b.index;
  };
  std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s),
                   pool.end(), higher);
  PrioritySelection sel;
  sel.tau_s = pool[s].priority;
  pool.resize(s);
  sel.top = std::move(pool);
  return sel;
}

// The number of pool retries before a priority shortcut gives up; reaching
// it means s is not attainable for this table/filter combination.
inline constexpr int kMaxPriorityAttempts = 64;

// Pool-size target for the initial tau guess, as a multiple of s+1. Large
// enough that a retry is rare, small enough that the pool stays O(s).
inline constexpr double kPriorityPoolFactor = 4.0;

namespace detail {

inline Summary finish_summary(Summary s, const SparseTable& t,
                              const NoiseSpec& spec) {
  s.noise = spec;
  s.m = t.m();
  s.source_nonzero = t.nonzero_count();
  std::sort(s.entries.begin(), s.entries.end(),
            [](const SummaryEntry& a, const SummaryEntry& b) {
              return a.index < b.index;
            });
  adjust_weights(s);
  return s;
}

inline double scaled_probability(double p, const ShortcutTweaks& tweaks) {
  if (!(tweaks.zero_inclusion_scale >= 0.0))
    throw std::invalid_argument("ShortcutTweaks: scale must be >= 0");
  return std::min(1.0, p * tweaks.zero_inclusion_scale);
}

// Appends the upgraded zero cells for one shortcut run: Binomial count,
// uniform locations, conditional values.
inline void append_upgraded_zeros(const SparseTable& t, SelectKind kind,
                                  const NoiseSpec& spec, std::int64_t theta,
                                  std::int64_t tau, RngHandle& rng,
                                  const ShortcutTweaks& tweaks,
                                  std::vector<SummaryEntry>& out) {
  const std::uint64_t zeros = t.m() - t.nonzero_count();
  const double p = scaled_probability(
      inclusion_probability(kind, spec, theta, tau), tweaks);
  const std::int64_t k =
      sample_binomial(static_cast<std::int64_t>(zeros), p, rng);
  if (k == 0) return;
  ConditionalValueLaw law(kind, spec, theta, tau);
  for (std::uint64_t loc :
       select_zero_locations(t, static_cast<std::uint64_t>(k), rng)) {
    out.push_back(
        {loc, law.sample(rng), 0.0, EntryOrigin::upgraded_zero});
  }
}

}  // namespace detail

enum class FilterSides { one, two };

// Filter shortcut: keep noisy values at or beyond theta.
inline Summary filter_shortcut(const SparseTable& t, std::int64_t theta,
                               FilterSides sides, const NoiseSpec& spec,
                               RngHandle& rng,
                               const ShortcutTweaks& tweaks = {}) {
  if (theta < 1)
    throw std::invalid_argument("filter_shortcut: theta must be >= 1");
  const bool two = sides == FilterSides::two;
  Summary s;
  s.method = two ? SummaryMethod::filter2 : SummaryMethod::filter1;
  s.theta = theta;

  GeometricSampler noise(spec);
  for (const CellEntry& c : t.entries()) {
    std::int64_t v = c.count + noise(rng);
    bool keep = two ? (std::llabs(v) >= theta) : (v >= theta);
    if (keep) s.entries.push_back({c.index, v, 0.0, EntryOrigin::nonzero});
  }
  detail::append_upgraded_zeros(
      t, two ? SelectKind::filter_two_sided : SelectKind::filter_one_sided,
      spec, theta, 0, rng, tweaks, s.entries);
  return detail::finish_summary(std::move(s), t, spec);
}

// Threshold-sampling shortcut: keep cell with probability min(|v|/tau, 1).
inline Summary threshold_shortcut(const SparseTable& t, std::int64_t tau,
                                  const NoiseSpec& spec, RngHandle& rng,
                                  const ShortcutTweaks& tweaks = {}) {
  if (tau < 1)
    throw std::invalid_argument("threshold_shortcut: tau must be >= 1");
  Summary s;
  s.method = SummaryMethod::threshold;
  s.tau = tau;

  GeometricSampler noise(spec);
  const double dtau = static_cast<double>(tau);
  for (const CellEntry& c : t.entries()) {
    std::int64_t v = c.count + noise(rng);
    double p = std::min(std::abs(static_cast<double>(v)) / dtau, 1.0);
    if (rng.u01() < p) s.entries.push_back({c.index, v, 0.0, EntryOrigin::nonzero});
  }
  detail::append_upgraded_zeros(t, SelectKind::threshold, spec, 0, tau, rng,
                                tweaks, s.entries);
  return detail::finish_summary(std::move(s), t, spec);
}

// Two-sided filter at theta followed by threshold sampling at tau.
inline Summary filter_threshold_shortcut(const SparseTable& t,
                                         std::int64_t theta, std::int64_t tau,
                                         const NoiseSpec& spec, RngHandle& rng,
                                         const ShortcutTweaks& tweaks = {}) {
  if (theta == 0) {
    Summary s = threshold_shortcut(t, tau, spec, rng, tweaks);
    s.method = SummaryMethod::filter_threshold;
    s.theta = 0;
    return s;
  }
  validate_selection(SelectKind::filter_threshold, theta, tau);
  Summary s;
  s.method = SummaryMethod::filter_threshold;
  s.theta = theta;
  s.tau = tau;

  GeometricSampler noise(spec);
  const double dtau = static_cast<double>(tau);
  for (const CellEntry& c : t.entries()) {
    std::int64_t v = c.count + noise(rng);
    if (std::llabs(v) < theta) continue;
    double p = std::min(std::abs(static_cast<double>(v)) / dtau, 1.0);
    if (rng.u01() < p) s.entries.push_back({c.index, v, 0.0, EntryOrigin::nonzero});
  }
  detail::append_upgraded_zeros(t, SelectKind::filter_threshold, spec, theta,
                                tau, rng, tweaks, s.entries);
  return detail::finish_summary(std::move(s), t, spec);
}

// Smallest theta >= 1 whose expected count of upgraded zero cells is at most
// the target t: (m-n) * p_theta <= t. The analytic index is corrected by
// +-1 steps so the bracketing is exact, not approximate.
inline std::int64_t choose_theta(std::uint64_t m, std::uint64_t n, double t,
                                 const NoiseSpec& spec, FilterSides sides) {
  if (n > m) throw std::invalid_argument("choose_theta: n > m");
  if (!(t > 0.0)) throw std::invalid_argument("choose_theta: target must be > 0");
  const double zeros = static_cast<double>(m - n);
  if (zeros == 0.0) return 1;
  const SelectKind kind = sides == FilterSides::two
                              ? SelectKind::filter_two_sided
                              : SelectKind::filter_one_sided;
  // alpha^theta <= c*t/zeros with c = (1+alpha) one-sided, (1+alpha)/2 two.
  double c = sides == FilterSides::two ? (1.0 + spec.alpha) / 2.0
                                       : (1.0 + spec.alpha);
  double bound = c * t / zeros;
  std::int64_t theta = 1;
  if (bound < 1.0)
    theta = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(std::log(bound) / spec.ln_alpha)));
  while (zeros * inclusion_probability(kind, spec, theta) > t) ++theta;
  while (theta > 1 &&
         zeros * inclusion_probability(kind, spec, theta - 1) <= t)
    --theta;
  return theta;
}

// Threshold giving expected summary size about t: the expected total
// inclusion mass is (||M||_1 + m*E|noise|)/tau, so invert at t.
inline std::int64_t choose_tau(const SparseTable& t, double target,
                               const NoiseSpec& spec) {
  if (!(target > 0.0)) throw std::invalid_argument("choose_tau: target must be > 0");
  double mass = static_cast<double>(t.l1_norm()) +
                static_cast<double>(t.m()) * spec.mean_abs_noise();
  return std::max<std::int64_t>(1, std::llround(mass / target));
}

// Largest tau whose estimated pool size still reaches `target` entries (so
// the realized pool lands near `target` but not far below). The estimate is
// deliberately crude -- it ignores the filter's effect on nonzero cells --
// because the caller retries with a halved tau whenever the realized pool
// comes up short; the guess only has to be in the right neighborhood.
inline std::int64_t guess_tau_for_target(const SparseTable& t,
                                         std::int64_t theta, double target,
                                         const NoiseSpec& spec) {
  const std::uint64_t zeros = t.m() - t.nonzero_count();
  const double mean_abs = spec.mean_abs_noise();
  auto expected_pool = [&](std::int64_t tau) {
    double e = 0.0;
    for (const CellEntry& c : t.entries())
      e += std::min((static_cast<double>(c.count) + mean_abs) /
                        static_cast<double>(tau),
                    1.0);
    SelectKind kind = theta == 0 ? SelectKind::threshold
                                 : SelectKind::filter_threshold;
    e += static_cast<double>(zeros) *
         inclusion_probability(kind, spec, theta, tau);
    return e;
  };
  std::int64_t lo = theta + 1;  // threshold: 1; combined: stay above theta
  if (expected_pool(lo) <= target) return lo;
  std::int64_t hi = lo;
  while (expected_pool(hi * 2) > target &&
         hi < (std::int64_t{1} << 40))
    hi *= 2;
  hi *= 2;  // expected_pool(hi) <= target (or hi hit the guard)
  // Largest tau in [lo, hi) with expected_pool(tau) > target... invariant:
  // expected_pool(lo) > target, expected_pool(hi) <= target.
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (expected_pool(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

namespace detail {

// Threshold-samples the table at tau_guess, recording for each retained cell
// its conditional rank r and priority |v|/r. Retention with probability
// min(|v|/tau_guess, 1) is exactly the event {priority > tau_guess} under
// r ~ U(0,1], and conditioned on it r is uniform on (0, min(|v|/tau_guess,1)]
// -- the retention uniform itself has that law, so it is reused as r.
// With theta >= 1 the pool is additionally filtered at theta; if tau_guess
// <= theta the threshold stage is vacuous (every surviving |v| >= theta >=
// tau_guess) and the pool degenerates to the plain filter output with free
// ranks r ~ U(0,1].
inline std::vector<PriorityDraw> priority_pool(const SparseTable& t,
                                               std::int64_t theta,
                                               std::int64_t tau_guess,
                                               const NoiseSpec& spec,
                                               RngHandle& rng,
                                               const ShortcutTweaks& tweaks) {
  std::vector<PriorityDraw> pool;
  GeometricSampler noise(spec);
  const double dtau = static_cast<double>(tau_guess);
  for (const CellEntry& c : t.entries()) {
    std::int64_t v = c.count + noise(rng);
    if (theta >= 1 && std::llabs(v) < theta) continue;
    double cap = std::min(std::abs(static_cast<double>(v)) / dtau, 1.0);
    double u = rng.u01();
    if (u >= cap) continue;
    pool.push_back({c.index, v, u, std::abs(static_cast<double>(v)) / u,
                    EntryOrigin::nonzero});
  }

  const std::uint64_t zeros = t.m() - t.nonzero_count();
  SelectKind kind;
  if (theta == 0) {
    kind = SelectKind::threshold;
  } else if (tau_guess > theta) {
    kind = SelectKind::filter_threshold;
  } else {
    kind = SelectKind::filter_two_sided;
  }
  const double p = scaled_probability(
      inclusion_probability(kind, spec, theta, tau_guess), tweaks);
  const std::int64_t k =
      sample_binomial(static_cast<std::int64_t>(zeros), p, rng);
  if (k > 0) {
    ConditionalValueLaw law(kind, spec, theta, tau_guess);
    for (std::uint64_t loc :
         select_zero_locations(t, static_cast<std::uint64_t>(k), rng)) {
      std::int64_t v = law.sample(rng);
      double cap = std::min(std::abs(static_cast<double>(v)) / dtau, 1.0);
      double r = rng.u01() * cap;
      pool.push_back({loc, v, r, std::abs(static_cast<double>(v)) / r,
                      EntryOrigin::upgraded_zero});
    }
  }
  return pool;
}

inline Summary priority_from_pools(const SparseTable& t, std::int64_t theta,
                                   std::int64_t s, std::int64_t tau_guess,
                                   const NoiseSpec& spec, RngHandle& rng,
                                   const ShortcutTweaks& tweaks) {
  if (s < 1 || static_cast<std::uint64_t>(s) >= t.m())
    throw std::invalid_argument("priority: need 1 <= s < m");
  if (tau_guess < 1)
    throw std::invalid_argument("priority: tau_guess must be >= 1");
  for (int attempt = 0; attempt < kMaxPriorityAttempts; ++attempt) {
    std::vector<PriorityDraw> pool =
        priority_pool(t, theta, tau_guess, spec, rng, tweaks);
    if (pool.size() >= static_cast<std::size_t>(s) + 1) {
      PrioritySelection sel =
          select_top_priorities(std::move(pool), static_cast<std::size_t>(s));
      Summary out;
      out.method = theta == 0 ? SummaryMethod::priority
                              : SummaryMethod::filter_priority;
      out.theta = theta == 0 ? -1 : theta;
      out.sample_size = s;
      out.tau_s = sel.tau_s;
      out.entries.reserve(sel.top.size());
      for (const PriorityDraw& d : sel.top)
        out.entries.push_back({d.index, d.value, 0.0, d.origin});
      return finish_summary(std::move(out), t, spec);
    }
    // Pool too small for a valid cutoff: halve the guess and redraw from
    // scratch with fresh randomness.
    tau_guess = std::max<std::int64_t>(1, tau_guess / 2);
  }
  throw std::runtime_error(
      "priority sampling: pool never reached s+1 draws after " +
      std::to_string(kMaxPriorityAttempts) +
      " attempts; s is likely unattainable for this table (try a smaller s "
      "or a weaker filter)");
}

}  // namespace detail

// Priority-sampling shortcut: exactly s entries, weight floor tau_s. A
// tau_guess_override of 0 means "estimate it from the table"; tests use
// nonzero overrides to exercise the retry path deterministically.
inline Summary priority_shortcut(const SparseTable& t, std::int64_t s,
                                 const NoiseSpec& spec, RngHandle& rng,
                                 std::int64_t tau_guess_override = 0,
                                 const ShortcutTweaks& tweaks = {}) {
  std::int64_t tau_guess =
      tau_guess_override > 0
          ? tau_guess_override
          : guess_tau_for_target(
                t, 0, kPriorityPoolFactor * static_cast<double>(s + 1), spec);
  return detail::priority_from_pools(t, 0, s, tau_guess, spec, rng, tweaks);
}

// Two-sided filter at theta, then priority sampling down to s entries.
inline Summary filter_priority_shortcut(const SparseTable& t,
                                        std::int64_t theta, std::int64_t s,
                                        const NoiseSpec& spec, RngHandle& rng,
                                        std::int64_t tau_guess_override = 0,
                                        const ShortcutTweaks& tweaks = {}) {
  if (theta < 1)
    throw std::invalid_argument("filter_priority_shortcut: theta must be >= 1");
  std::int64_t tau_guess =
      tau_guess_override > 0
          ? tau_guess_override
          : guess_tau_for_target(
                t, theta, kPriorityPoolFactor * static_cast<double>(s + 1),
                spec);
  return detail::priority_from_pools(t, theta, s, tau_guess, spec, rng, tweaks);
}

// Bundled method + parameters, the unit the CLI, the reference path and the
// verification harness all speak.
struct MethodParams {
  SummaryMethod method = SummaryMethod::geometric_full;
  std::int64_t theta = -1;
  std::int64_t tau = -1;
  std::int64_t s = -1;

  std::string describe() const {
    std::string d = to_string(method);
    if (theta >= 0) d += " theta=" + std::to_string(theta);
    if (tau >= 0) d += " tau=" + std::to_string(tau);
    if (s >= 0) d += " s=" + std::to_string(s);
    return d;
  }
};

// Dense domain cap for the laborious path; above this the naive pipeline is
// refused rather than silently thrashing memory.
inline constexpr std::uint64_t kLaboriousMaxDomain = std::uint64_t{1} << 24;

// The naive reference pipeline: noise all m cells, then select. Costs
// Theta(m) time and memory; exists to verify and benchmark the shortcuts.
inline Summary laborious_path(const SparseTable& t, const MethodParams& p,
                              const NoiseSpec& spec, RngHandle& rng) {
  if (t.m() > kLaboriousMaxDomain)
    throw std::invalid_argument(
        "laborious_path: domain exceeds the dense-materialization cap");
  const auto m = static_cast<std::size_t>(t.m());
  std::vector<std::int64_t> noisy(m);
  {
    GeometricSampler noise(spec);
    auto it = t.entries().begin();
    for (std::size_t i = 0; i < m; ++i) {
      std::int64_t base = 0;
      if (it != t.entries().end() && it->index == i) base = (it++)->count;
      noisy[i] = base + noise(rng);
    }
  }

  Summary out;
  out.method = p.method;
  auto emit = [&](std::size_t i) {
    out.entries.push_back({static_cast<std::uint64_t>(i), noisy[i], 0.0,
                           t.count_at(i) != 0 ? EntryOrigin::nonzero
                                              : EntryOrigin::upgraded_zero});
  };

  switch (p.method) {
    case SummaryMethod::geometric_full:
      for (std::size_t i = 0; i < m; ++i)
        if (noisy[i] != 0) emit(i);
      break;
    case SummaryMethod::filter1:
      if (p.theta < 1) throw std::invalid_argument("laborious filter1: theta >= 1");
      out.theta = p.theta;
      for (std::size_t i = 0; i < m; ++i)
        if (noisy[i] >= p.theta) emit(i);
      break;
    case SummaryMethod::filter2:
      if (p.theta < 1) throw std::invalid_argument("laborious filter2: theta >= 1");
      out.theta = p.theta;
      for (std::size_t i = 0; i < m; ++i)
        if (std::llabs(noisy[i]) >= p.theta) emit(i);
      break;
    case SummaryMethod::threshold:
    case SummaryMethod::filter_threshold: {
      if (p.method == SummaryMethod::filter_threshold) {
        if (p.theta < 0 || p.theta >= p.tau)
          throw std::invalid_argument("laborious: need 0 <= theta < tau");
        out.theta = p.theta;
      }
      if (p.tau < 1) throw std::invalid_argument("laborious: tau >= 1");
      out.tau = p.tau;
      const std::int64_t theta =
          p.method == SummaryMethod::filter_threshold ? p.theta : 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (theta >= 1 && std::llabs(noisy[i]) < theta) continue;
        double pr = std::min(
            std::abs(static_cast<double>(noisy[i])) / static_cast<double>(p.tau),
            1.0);
        if (rng.u01() < pr) emit(i);
      }
      break;
    }
    case SummaryMethod::priority:
    case SummaryMethod::filter_priority: {
      const std::int64_t theta =
          p.method == SummaryMethod::filter_priority ? p.theta : 0;
      if (p.method == SummaryMethod::filter_priority) {
        if (theta < 1) throw std::invalid_argument("laborious: theta >= 1");
        out.theta = theta;
      }
      if (p.s < 1 || static_cast<std::uint64_t>(p.s) >= t.m())
        throw std::invalid_argument("laborious: need 1 <= s < m");
      std::vector<PriorityDraw> pool;
      for (std::size_t i = 0; i < m; ++i) {
        std::int64_t v = noisy[i];
        if (v == 0) continue;  // priority |v|/r = 0, can never be selected
        if (theta >= 1 && std::llabs(v) < theta) continue;
        double r = rng.u01();
        pool.push_back({static_cast<std::uint64_t>(i), v, r,
                        std::abs(static_cast<double>(v)) / r,
                        t.count_at(i) != 0 ? EntryOrigin::nonzero
                                           : EntryOrigin::upgraded_zero});
      }
      if (pool.size() < static_cast<std::size_t>(p.s) + 1)
        throw std::runtime_error(
            "laborious priority: fewer than s+1 positive-priority cells");
      PrioritySelection sel = select_top_priorities(
          std::move(pool), static_cast<std::size_t>(p.s));
      out.sample_size = p.s;
      out.tau_s = sel.tau_s;
      for (const PriorityDraw& d : sel.top)
        out.entries.push_back({d.index, d.value, 0.0, d.origin});
      break;
    }
  }
  return detail::finish_summary(std::move(out), t, spec);
}

// Dispatch a shortcut by method descriptor. geometric_full has no shortcut
// (its output is dense by definition) and routes to the laborious pipeline.
inline Summary run_shortcut(const SparseTable& t, const MethodParams& p,
                            const NoiseSpec& spec, RngHandle& rng,
                            const ShortcutTweaks& tweaks = {},
                            std::int64_t tau_guess_override = 0) {
  switch (p.method) {
    case SummaryMethod::filter1:
      return filter_shortcut(t, p.theta, FilterSides::one, spec, rng, tweaks);
    case SummaryMethod::filter2:
      return filter_shortcut(t, p.theta, FilterSides::two, spec, rng, tweaks);
    case SummaryMethod::threshold:
      return threshold_shortcut(t, p.tau, spec, rng, tweaks);
    case SummaryMethod::filter_threshold:
      return filter_threshold_shortcut(t, p.theta, p.tau, spec, rng, tweaks);
    case SummaryMethod::priority:
      return priority_shortcut(t, p.s, spec, rng, tau_guess_override, tweaks);
    case SummaryMethod::filter_priority:
      return filter_priority_shortcut(t, p.theta, p.s, spec, rng,
                                      tau_guess_override, tweaks);
    case SummaryMethod::geometric_full:
      return laborious_path(t, p, spec, rng);
  }
  throw std::logic_error("unreachable");
}

}  // namespace sparsedp

#endif  // SPARSEDP_SUMMARIZE_HPP_
