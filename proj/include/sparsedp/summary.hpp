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

#ifndef SPARSEDP_SUMMARY_HPP_
#define SPARSEDP_SUMMARY_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedp/geometric.hpp"

namespace sparsedp {

enum class SummaryMethod {
  filter1,          // one-sided filter at theta
  filter2,          // two-sided filter at theta
  threshold,        // threshold sampling at tau
  priority,         // priority sampling to exactly s entries
  filter_threshold, // two-sided filter at theta, then threshold at tau
  filter_priority,  // two-sided filter at theta, then priority to s entries
  geometric_full,   // every cell noised, zero-noise results dropped
};

inline std::string to_string(SummaryMethod m) {
  switch (m) {
    case SummaryMethod::filter1: return "filter1";
    case SummaryMethod::filter2: return "filter2";
    case SummaryMethod::threshold: return "threshold";
    case SummaryMethod::priority: return "priority";
    case SummaryMethod::filter_threshold: return "filter-threshold";
    case SummaryMethod::filter_priority: return "filter-priority";
    case SummaryMethod::geometric_full: return "geometric-full";
  }
  throw std::logic_error("unreachable");
}

inline SummaryMethod summary_method_from_string(const std::string& s) {
  if (s == "filter1") return SummaryMethod::filter1;
  if (s == "filter2") return SummaryMethod::filter2;
  if (s == "threshold") return SummaryMethod::threshold;
  if (s == "priority") return SummaryMethod::priority;
  if (s == "filter-threshold") return SummaryMethod::filter_threshold;
  if (s == "filter-priority") return SummaryMethod::filter_priority;
  if (s == "geometric-full") return SummaryMethod::geometric_full;
  throw std::invalid_argument("unknown summary method: " + s);
}

inline bool is_filter_based(SummaryMethod m) {
  return m == SummaryMethod::filter1 || m == SummaryMethod::filter2 ||
         m == SummaryMethod::filter_priority ||
         m == SummaryMethod::filter_threshold;
}

// Whether an entry came from a cell that was nonzero in the input, or from a
// zero cell upgraded by noise. The distinction exists for verification and
// diagnostics only; query answering never looks at it.
enum class EntryOrigin : std::uint8_t { nonzero = 0, upgraded_zero = 1 };

struct SummaryEntry {
  std::uint64_t index = 0;       // cell (or dyadic node) linear index
  std::int64_t value = 0;        // released noisy value
  double adjusted_weight = 0.0;  // estimator weight (see adjust_weights)
  EntryOrigin origin = EntryOrigin::nonzero;
};

// A released, privacy-protected sparse summary. Entries are sorted by index
// and have distinct indices. Parameter fields not applicable to `method`
// stay at their defaults (theta/tau/sample_size -1, tau_s 0).
struct Summary {
  SummaryMethod method = SummaryMethod::geometric_full;
  NoiseSpec noise;               // includes any dyadic sensitivity scaling
  std::uint64_t m = 0;           // domain size the entries index into
  std::uint64_t source_nonzero = 0;
  std::int64_t theta = -1;
  std::int64_t tau = -1;
  std::int64_t sample_size = -1;  // s, priority methods
  double tau_s = 0.0;             // realized priority threshold
  std::uint64_t seed = 0;         // generation seed (0 if not recorded)
  bool dyadic = false;
  int height = 0;                 // dyadic tree height h (levels 0..h)
  std::uint64_t leaf_m = 0;       // original domain size when dyadic
  std::vector<SummaryEntry> entries;
};

// Attach Horvitz-Thompson adjusted weights in place.
//
// Filtering keeps a cell deterministically given its noisy value, so the
// value itself is the estimator contribution. Threshold sampling includes a
// cell with probability min(|v|/tau, 1), making sign(v)*max(|v|, tau)
// inversely-probability-weighted; priority sampling uses the realized
// cutoff tau_s the same way.
inline Summary& adjust_weights(Summary& s) {
  switch (s.method) {
    case SummaryMethod::filter1:
    case SummaryMethod::filter2:
    case SummaryMethod::geometric_full:
      for (SummaryEntry& e : s.entries)
        e.adjusted_weight = static_cast<double>(e.value);
      return s;
    case SummaryMethod::threshold:
    case SummaryMethod::filter_threshold: {
      if (s.tau < 1)
        throw std::invalid_argument("adjust_weights: summary lacks tau");
      auto tau = static_cast<double>(s.tau);
      for (SummaryEntry& e : s.entries) {
        double mag = std::max(std::abs(static_cast<double>(e.value)), tau);
        e.adjusted_weight = e.value < 0 ? -mag : mag;
      }
      return s;
    }
    case SummaryMethod::priority:
    case SummaryMethod::filter_priority: {
      if (!(s.tau_s > 0.0))
        throw std::invalid_argument("adjust_weights: summary lacks tau_s");
      for (SummaryEntry& e : s.entries) {
        double mag = std::max(std::abs(static_cast<double>(e.value)), s.tau_s);
        e.adjusted_weight = e.value < 0 ? -mag : mag;
      }
      return s;
    }
  }
  throw std::logic_error("unreachable");
}

// Post-processing to nonnegative counts: clamp negatives to zero and drop
// the resulting zero entries (a zero entry is indistinguishable from an
// absent cell). Weights are reset to the clamped values.
inline Summary clamp_nonnegative(const Summary& in) {
  Summary out = in;
  out.entries.clear();
  out.entries.reserve(in.entries.size());
  for (const SummaryEntry& e : in.entries) {
    if (e.value <= 0) continue;
    SummaryEntry c = e;
    c.adjusted_weight = static_cast<double>(c.value);
    out.entries.push_back(c);
  }
  return out;
}

}  // namespace sparsedp

#endif  // SPARSEDP_SUMMARY_HPP_
