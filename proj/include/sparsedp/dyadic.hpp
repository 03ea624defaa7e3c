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
// Dyadic range decomposition over an ordered attribute.
//
// The domain [0, m) is padded to 2^h cells (h = ceil(log2 m)) and organized
// into a complete binary interval tree: level-l node o covers
// [o*2^l, (o+1)*2^l). Every range [lo, hi] splits into at most 2 nodes per
// level, so a noisy release of all node counts answers any range query by
// summing at most 2h entries instead of hi-lo+1. Each record contributes to
// one node per level (h+1 of them), so the per-record sensitivity scales by
// h+1 and the privacy budget is split accordingly.
//
// Nodes are linearized level-major with leaves first: node (l, o) gets index
// 2^(h+1) - 2^(h+1-l) + o, for a total domain of 2^(h+1) - 1 nodes. A
// transformed table is just a SparseTable over that node domain, so every
// summarization shortcut applies unchanged.

#ifndef SPARSEDP_DYADIC_HPP_
#define SPARSEDP_DYADIC_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sparsedp/summarize.hpp"
#include "sparsedp/summary.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

inline int height_for_domain(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("height_for_domain: m must be >= 1");
  if (m == 1) return 0;
  return static_cast<int>(std::bit_width(m - 1));  // ceil(log2 m)
}

struct DyadicNode {
  int level = 0;
  std::uint64_t offset = 0;

  std::uint64_t first_leaf() const { return offset << level; }
  std::uint64_t leaf_count() const { return std::uint64_t{1} << level; }
  bool operator==(const DyadicNode& o) const {
    return level == o.level && offset == o.offset;
  }
};

inline std::uint64_t dyadic_node_count(int height) {
  return (std::uint64_t{2} << height) - 1;  // 2^(h+1) - 1
}

inline std::uint64_t level_base(int height, int level) {
  if (level < 0 || level > height)
    throw std::out_of_range("level_base: level outside [0, height]");
  return (std::uint64_t{2} << height) - (std::uint64_t{2} << (height - level));
}

inline std::uint64_t node_linear_index(int height, DyadicNode n) {
  if (n.offset >= (std::uint64_t{1} << (height - n.level)))
    throw std::out_of_range("node_linear_index: offset outside level");
  return level_base(height, n.level) + n.offset;
}

inline DyadicNode node_from_linear(int height, std::uint64_t index) {
  for (int l = 0; l <= height; ++l) {
    std::uint64_t width = std::uint64_t{1} << (height - l);
    std::uint64_t base = level_base(height, l);
    if (index < base + width) return {l, index - base};
  }
  throw std::out_of_range("node_from_linear: index outside node domain");
}

// Per-record sensitivity grows by the number of tree levels a record
// touches: h+1.
inline NoiseSpec dyadic_noise_spec(const NoiseSpec& base, std::uint64_t m) {
  int h = height_for_domain(m);
  return NoiseSpec::make(base.epsilon, base.sensitivity * (h + 1));
}

// A sparse table of node counts plus the geometry needed to interpret it.
struct DyadicTable {
  int height = 0;
  std::uint64_t leaf_m = 0;  // original (unpadded) domain size
  SparseTable nodes;
};

inline DyadicTable dyadic_transform(const SparseTable& t) {
  if (t.domain().attributes() != 1)
    throw std::invalid_argument(
        "dyadic_transform: requires a single ordered attribute");
  DyadicTable d;
  d.height = height_for_domain(t.m());
  d.leaf_m = t.m();
  std::unordered_map<std::uint64_t, std::int64_t> acc;
  acc.reserve(t.nonzero_count() * static_cast<std::size_t>(d.height + 1));
  for (const CellEntry& c : t.entries())
    for (int l = 0; l <= d.height; ++l)
      acc[node_linear_index(d.height, {l, c.index >> l})] += c.count;
  std::vector<CellEntry> cells;
  cells.reserve(acc.size());
  for (const auto& [idx, count] : acc) cells.push_back({idx, count});
  d.nodes = SparseTable(DomainSpec::flat(dyadic_node_count(d.height)),
                        std::move(cells));
  return d;
}

// Canonical minimal dyadic cover of [lo, hi]: the classic two-pointer walk
// up the tree, emitting a node whenever a boundary is odd at the current
// level. At most 2 nodes per level; returned in left-to-right order.
inline std::vector<DyadicNode> decompose_range(std::uint64_t lo,
                                               std::uint64_t hi,
                                               std::uint64_t m) {
  if (lo > hi || hi >= m)
    throw std::out_of_range("decompose_range: need lo <= hi < m");
  std::vector<DyadicNode> nodes;
  std::uint64_t a = lo, b = hi + 1;
  int level = 0;
  while (a < b) {
    if (a & 1) nodes.push_back({level, a++});
    if (b & 1) nodes.push_back({level, --b});
    a >>= 1;
    b >>= 1;
    ++level;
  }
  std::sort(nodes.begin(), nodes.end(), [](DyadicNode x, DyadicNode y) {
    return x.first_leaf() < y.first_leaf();
  });
  return nodes;
}

// Drops entries whose strict ancestors are not all present in the summary.
// Only meaningful for filter summaries: filtering keeps a node iff its noisy
// count clears theta, and a true heavy range forces every ancestor to be at
// least as heavy, so a surviving node with a missing ancestor is (with high
// probability) an upgraded zero -- pruning it removes noise while rarely
// touching signal. Sampling-based summaries drop ancestors by design, so the
// operation rejects them.
inline Summary consistency_prune(const Summary& s) {
  if (!s.dyadic)
    throw std::invalid_argument("consistency_prune: summary is not dyadic");
  if (s.method != SummaryMethod::filter1 && s.method != SummaryMethod::filter2)
    throw std::invalid_argument(
        "consistency_prune: only filter summaries support consistency");
  std::unordered_set<std::uint64_t> present;
  present.reserve(s.entries.size() * 2);
  for (const SummaryEntry& e : s.entries) present.insert(e.index);

  Summary out = s;
  out.entries.clear();
  for (const SummaryEntry& e : s.entries) {
    DyadicNode n = node_from_linear(s.height, e.index);
    bool keep = true;
    std::uint64_t o = n.offset;
    for (int l = n.level + 1; l <= s.height && keep; ++l) {
      o >>= 1;
      keep = present.count(node_linear_index(s.height, {l, o})) > 0;
    }
    if (keep) out.entries.push_back(e);
  }
  return out;
}

// Estimate sum(M[lo..hi]) from a dyadic summary by summing the covering
// nodes' weights; absent nodes contribute zero.
inline double answer_range_dyadic(const Summary& s, std::uint64_t lo,
                                  std::uint64_t hi) {
  if (!s.dyadic)
    throw std::invalid_argument("answer_range_dyadic: summary is not dyadic");
  if (lo > hi || hi >= s.leaf_m)
    throw std::out_of_range("answer_range_dyadic: range outside the domain");
  std::unordered_map<std::uint64_t, double> weights;
  weights.reserve(s.entries.size() * 2);
  for (const SummaryEntry& e : s.entries) weights[e.index] = e.adjusted_weight;
  // Pad the range walk to the full tree width: covering nodes never extend
  // past hi <= leaf_m-1, so padding cells contribute nothing.
  double total = 0.0;
  for (DyadicNode n :
       decompose_range(lo, hi, std::uint64_t{1} << s.height)) {
    auto it = weights.find(node_linear_index(s.height, n));
    if (it != weights.end()) total += it->second;
  }
  return total;
}

// Full dyadic release pipeline: transform, rescale the privacy budget for
// the taller sensitivity, run the requested shortcut over node counts, and
// optionally enforce ancestor consistency (filter-based methods only; for
// filter+priority the pruning happens between the filter and the sampling
// stages, so the final sample is drawn from the pruned survivor set).
inline Summary summarize_dyadic(const SparseTable& t, const MethodParams& p,
                                const NoiseSpec& base_spec, RngHandle& rng,
                                bool consistency = false,
                                const ShortcutTweaks& tweaks = {}) {
  if (consistency && !is_filter_based(p.method))
    throw std::invalid_argument(
        "summarize_dyadic: consistency requires a filter-based method");
  if (consistency && p.method == SummaryMethod::filter_threshold)
    throw std::invalid_argument(
        "summarize_dyadic: consistency with filter-threshold is not supported");
  DyadicTable d = dyadic_transform(t);
  NoiseSpec spec = dyadic_noise_spec(base_spec, t.m());

  auto mark = [&](Summary s) {
    s.dyadic = true;
    s.height = d.height;
    s.leaf_m = d.leaf_m;
    return s;
  };

  if (!consistency || p.method == SummaryMethod::filter1 ||
      p.method == SummaryMethod::filter2) {
    Summary s = mark(run_shortcut(d.nodes, p, spec, rng, tweaks));
    if (consistency) s = consistency_prune(s);
    return s;
  }

  // filter-priority with consistency: full filter release, prune, then
  // priority-sample the survivors (each survivor's rank r ~ U(0,1]).
  if (p.s < 1)
    throw std::invalid_argument("summarize_dyadic: filter-priority needs s >= 1");
  Summary filtered = mark(filter_shortcut(d.nodes, p.theta, FilterSides::two,
                                          spec, rng, tweaks));
  filtered = consistency_prune(filtered);
  if (filtered.entries.size() < static_cast<std::size_t>(p.s) + 1)
    throw std::runtime_error(
        "summarize_dyadic: pruned filter output has fewer than s+1 entries; "
        "lower theta or s");
  std::vector<PriorityDraw> pool;
  pool.reserve(filtered.entries.size());
  for (const SummaryEntry& e : filtered.entries) {
    double r = rng.u01();
    pool.push_back({e.index, e.value, r,
                    std::abs(static_cast<double>(e.value)) / r, e.origin});
  }
  PrioritySelection sel =
      select_top_priorities(std::move(pool), static_cast<std::size_t>(p.s));
  Summary out;
  out.method = SummaryMethod::filter_priority;
  out.theta = p.theta;
  out.sample_size = p.s;
  out.tau_s = sel.tau_s;
  for (const PriorityDraw& dr : sel.top)
    out.entries.push_back({dr.index, dr.value, 0.0, dr.origin});
  out = detail::finish_summary(std::move(out), d.nodes, spec);
  return mark(std::move(out));
}

}  // namespace sparsedp

#endif  // SPARSEDP_DYADIC_HPP_
