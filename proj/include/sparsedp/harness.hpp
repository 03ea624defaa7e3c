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
// Verification harness: distributional equivalence of the shortcut and
// laborious pipelines, and wall-clock throughput comparison.

#ifndef SPARSEDP_HARNESS_HPP_
#define SPARSEDP_HARNESS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparsedp/stats.hpp"
#include "sparsedp/summarize.hpp"
#include "sparsedp/summary.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

struct EquivalenceReport {
  MethodParams params;
  std::size_t trials = 0;
  KsResult values_ks;       // pooled released values of upgraded zero cells
  Chi2Result size_chi2;     // summary-size distribution
  Chi2Result upgraded_chi2;  // per-summary count of upgraded zero entries
  bool sizes_degenerate = false;  // both sides produced one fixed size
  double max_inclusion_z = 0.0;   // largest standardized per-cell gap
  std::size_t cells_over_4se = 0;
  double mean_size_shortcut = 0.0;
  double mean_size_laborious = 0.0;

  bool passes(double significance) const {
    return values_ks.p_value > significance &&
           size_chi2.p_value > significance &&
           upgraded_chi2.p_value > significance;
  }

  // Smallest p-value across the comparisons; the headline number when the
  // harness is used to show a deliberately broken shortcut gets rejected.
  double min_p_value() const {
    return std::min({values_ks.p_value, size_chi2.p_value,
                     upgraded_chi2.p_value});
  }
};

// Runs `trials` independent generations down both pipelines and compares
// three observable distributions: what values upgraded zero cells carry,
// how many entries a summary has, and how often each individual cell is
// included. The shortcut side can be mutated through `tweaks` to verify the
// comparison has the power to detect a biased implementation.
inline EquivalenceReport equivalence_test(const SparseTable& t,
                                          const MethodParams& params,
                                          const NoiseSpec& spec,
                                          std::size_t trials, RngHandle& rng,
                                          const ShortcutTweaks& tweaks = {}) {
  if (trials == 0) throw std::invalid_argument("equivalence_test: trials >= 1");
  RngHandle shortcut_rng = rng.fork("equivalence-shortcut");
  RngHandle laborious_rng = rng.fork("equivalence-laborious");

  CountHistogram values_a, values_b, sizes_a, sizes_b, upg_a, upg_b;
  std::vector<std::uint32_t> incl_a(static_cast<std::size_t>(t.m()), 0);
  std::vector<std::uint32_t> incl_b(static_cast<std::size_t>(t.m()), 0);
  double size_sum_a = 0.0, size_sum_b = 0.0;

  auto record = [](const Summary& s, CountHistogram& values,
                   CountHistogram& sizes, CountHistogram& upgraded,
                   std::vector<std::uint32_t>& incl, double& size_sum) {
    add_sample(sizes, static_cast<std::int64_t>(s.entries.size()));
    size_sum += static_cast<double>(s.entries.size());
    std::int64_t upgraded_count = 0;
    for (const SummaryEntry& e : s.entries) {
      ++incl[static_cast<std::size_t>(e.index)];
      if (e.origin == EntryOrigin::upgraded_zero) {
        add_sample(values, e.value);
        ++upgraded_count;
      }
    }
    add_sample(upgraded, upgraded_count);
  };

  for (std::size_t i = 0; i < trials; ++i) {
    record(run_shortcut(t, params, spec, shortcut_rng, tweaks), values_a,
           sizes_a, upg_a, incl_a, size_sum_a);
    record(laborious_path(t, params, spec, laborious_rng), values_b, sizes_b,
           upg_b, incl_b, size_sum_b);
  }

  EquivalenceReport rep;
  rep.params = params;
  rep.trials = trials;
  rep.values_ks = ks_two_sample(values_a, values_b);
  rep.size_chi2 = chi_square_two_sample(sizes_a, sizes_b);
  rep.upgraded_chi2 = chi_square_two_sample(upg_a, upg_b);
  rep.sizes_degenerate = rep.size_chi2.bins < 2;
  rep.mean_size_shortcut = size_sum_a / static_cast<double>(trials);
  rep.mean_size_laborious = size_sum_b / static_cast<double>(trials);

  const double n = static_cast<double>(trials);
  for (std::size_t i = 0; i < incl_a.size(); ++i) {
    double f1 = static_cast<double>(incl_a[i]) / n;
    double f2 = static_cast<double>(incl_b[i]) / n;
    double pooled = 0.5 * (f1 + f2);
    double se = std::sqrt(pooled * (1.0 - pooled) * 2.0 / n);
    if (se == 0.0) continue;  // both all-in or all-out: no gap
    double z = std::abs(f1 - f2) / se;
    rep.max_inclusion_z = std::max(rep.max_inclusion_z, z);
    if (z > 4.0) ++rep.cells_over_4se;
  }
  return rep;
}

// Statistical checks are expected to fail with probability `significance`
// even when everything is correct; run once and allow a single fresh-seed
// retry. (Callers pass a lambda running the full check on the given stream.)
inline bool passes_with_retry(const std::function<bool(RngHandle&)>& check,
                              RngHandle& rng, int attempts = 2) {
  for (int i = 0; i < attempts; ++i) {
    RngHandle attempt = rng.fork(static_cast<std::uint64_t>(i) + 1);
    if (check(attempt)) return true;
  }
  return false;
}

struct BenchRow {
  std::string label;
  MethodParams params;
  std::uint64_t m = 0;
  std::size_t n = 0;
  double wall_ms = 0.0;       // median over repeats
  std::size_t out_entries = 0;  // size of the last generated summary
};

// Median wall-clock time of `repeats` runs of fn(); the summary produced by
// the last run is reported through `out`.
template <typename Fn>
inline double median_wall_ms(Fn&& fn, int repeats, Summary* out = nullptr) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repeats));
  for (int i = 0; i < repeats; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Summary s = fn();
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (out && i == repeats - 1) *out = std::move(s);
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

// Times each method's shortcut on the given table; with `include_laborious`
// also times the naive pipeline for the same parameters (domain permitting).
inline std::vector<BenchRow> bench_throughput(
    const SparseTable& t, const std::vector<MethodParams>& methods,
    const NoiseSpec& spec, RngHandle& rng, int repeats = 3,
    bool include_laborious = false) {
  std::vector<BenchRow> rows;
  for (const MethodParams& p : methods) {
    BenchRow row;
    row.label = to_string(p.method);
    row.params = p;
    row.m = t.m();
    row.n = t.nonzero_count();
    Summary last;
    row.wall_ms = median_wall_ms(
        [&] { return run_shortcut(t, p, spec, rng); }, repeats, &last);
    row.out_entries = last.entries.size();
    rows.push_back(std::move(row));

    if (include_laborious && p.method != SummaryMethod::geometric_full &&
        t.m() <= kLaboriousMaxDomain) {
      BenchRow lrow;
      lrow.label = "laborious-" + to_string(p.method);
      lrow.params = p;
      lrow.m = t.m();
      lrow.n = t.nonzero_count();
      Summary llast;
      lrow.wall_ms = median_wall_ms(
          [&] { return laborious_path(t, p, spec, rng); }, repeats, &llast);
      lrow.out_entries = llast.entries.size();
      rows.push_back(std::move(lrow));
    }
  }
  return rows;
}

}  // namespace sparsedp

#endif  // SPARSEDP_HARNESS_HPP_
