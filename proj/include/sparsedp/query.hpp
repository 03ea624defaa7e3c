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
// Linear query answering over released summaries. Every estimate is a sum
// of per-entry weights restricted to the queried cells; absent cells
// contribute zero (or theta/2 under the optional bias-correction mode).

#ifndef SPARSEDP_QUERY_HPP_
#define SPARSEDP_QUERY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparsedp/dyadic.hpp"
#include "sparsedp/summary.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

enum class QueryKind { point, range, subset };

struct Query {
  QueryKind kind = QueryKind::point;
  std::uint64_t index = 0;            // point
  std::uint64_t lo = 0, hi = 0;       // range, inclusive
  std::vector<std::uint64_t> subset;  // subset
  std::string id;                     // echoed into reports

  static Query point(std::uint64_t i, std::string id = "") {
    Query q;
    q.kind = QueryKind::point;
    q.index = i;
    q.id = std::move(id);
    return q;
  }
  static Query range(std::uint64_t lo, std::uint64_t hi, std::string id = "") {
    Query q;
    q.kind = QueryKind::range;
    q.lo = lo;
    q.hi = hi;
    q.id = std::move(id);
    return q;
  }
  static Query subset_of(std::vector<std::uint64_t> cells, std::string id = "") {
    Query q;
    q.kind = QueryKind::subset;
    q.subset = std::move(cells);
    q.id = std::move(id);
    return q;
  }
};

// How to turn a summary entry into estimator mass.
//  * adjusted:         Horvitz-Thompson weights (default; unbiased).
//  * unadjusted:       raw released values.
//  * clamped:          raw values clamped to >= 0.
//  * theta_correction: raw values, plus theta/2 for every queried cell absent
//                      from a filter summary (heuristic bias patch for the
//                      mass a one/two-sided filter suppresses; accuracy not
//                      validated, off by default).
enum class WeightMode { adjusted, unadjusted, clamped, theta_correction };

inline std::string to_string(WeightMode m) {
  switch (m) {
    case WeightMode::adjusted: return "adjusted";
    case WeightMode::unadjusted: return "unadjusted";
    case WeightMode::clamped: return "clamped";
    case WeightMode::theta_correction: return "theta-correction";
  }
  throw std::logic_error("unreachable");
}

inline WeightMode weight_mode_from_string(const std::string& s) {
  if (s == "adjusted") return WeightMode::adjusted;
  if (s == "unadjusted") return WeightMode::unadjusted;
  if (s == "clamped") return WeightMode::clamped;
  if (s == "theta-correction") return WeightMode::theta_correction;
  throw std::invalid_argument("unknown weight mode: " + s);
}

inline double entry_weight(const SummaryEntry& e, WeightMode mode) {
  switch (mode) {
    case WeightMode::adjusted:
      return e.adjusted_weight;
    case WeightMode::unadjusted:
    case WeightMode::theta_correction:
      return static_cast<double>(e.value);
    case WeightMode::clamped:
      return e.value > 0 ? static_cast<double>(e.value) : 0.0;
  }
  throw std::logic_error("unreachable");
}

// Prebuilt lookup structures for answering many queries against one summary.
class SummaryEvaluator {
 public:
  explicit SummaryEvaluator(const Summary& s, WeightMode mode = WeightMode::adjusted)
      : summary_(&s), mode_(mode) {
    if (mode == WeightMode::theta_correction) {
      if (s.dyadic || (s.method != SummaryMethod::filter1 &&
                       s.method != SummaryMethod::filter2))
        throw std::invalid_argument(
            "theta-correction applies only to flat filter summaries");
      correction_ = static_cast<double>(s.theta) / 2.0;
    }
    by_index_.reserve(s.entries.size() * 2);
    indices_.reserve(s.entries.size());
    prefix_.reserve(s.entries.size() + 1);
    prefix_.push_back(0.0);
    for (const SummaryEntry& e : s.entries) {
      double w = entry_weight(e, mode);
      by_index_.emplace(e.index, w);
      indices_.push_back(e.index);  // entries are sorted by index
      prefix_.push_back(prefix_.back() + w);
    }
  }

  const Summary& summary() const { return *summary_; }

  double point(std::uint64_t i) const {
    check_cell(i);
    if (summary_->dyadic) {
      // Leaf nodes are linearized first, so a cell's leaf node id is the
      // cell index itself.
      auto it = by_index_.find(i);
      return it == by_index_.end() ? 0.0 : it->second;
    }
    auto it = by_index_.find(i);
    if (it != by_index_.end()) return it->second;
    return correction_;
  }

  double range(std::uint64_t lo, std::uint64_t hi) const {
    if (lo > hi) throw std::invalid_argument("range query: lo > hi");
    check_cell(hi);
    if (summary_->dyadic) {
      double total = 0.0;
      for (DyadicNode n : decompose_range(
               lo, hi, std::uint64_t{1} << summary_->height)) {
        auto it = by_index_.find(node_linear_index(summary_->height, n));
        if (it != by_index_.end()) total += it->second;
      }
      return total;
    }
    auto first = std::lower_bound(indices_.begin(), indices_.end(), lo);
    auto last = std::upper_bound(indices_.begin(), indices_.end(), hi);
    auto a = static_cast<std::size_t>(first - indices_.begin());
    auto b = static_cast<std::size_t>(last - indices_.begin());
    double total = prefix_[b] - prefix_[a];
    if (correction_ != 0.0)
      total += correction_ *
               static_cast<double>((hi - lo + 1) - (b - a));
    return total;
  }

  double subset(std::span<const std::uint64_t> cells) const {
    if (summary_->dyadic)
      throw std::invalid_argument(
          "subset queries are not defined on dyadic summaries");
    double total = 0.0;
    std::size_t found = 0;
    for (std::uint64_t i : cells) {
      check_cell(i);
      auto it = by_index_.find(i);
      if (it != by_index_.end()) {
        total += it->second;
        ++found;
      }
    }
    if (correction_ != 0.0)
      total += correction_ * static_cast<double>(cells.size() - found);
    return total;
  }

  double answer(const Query& q) const {
    switch (q.kind) {
      case QueryKind::point: return point(q.index);
      case QueryKind::range: return range(q.lo, q.hi);
      case QueryKind::subset: return subset(q.subset);
    }
    throw std::logic_error("unreachable");
  }

 private:
  void check_cell(std::uint64_t i) const {
    std::uint64_t domain = summary_->dyadic ? summary_->leaf_m : summary_->m;
    if (i >= domain)
      throw std::out_of_range("query touches a cell outside the domain");
  }

  const Summary* summary_;
  WeightMode mode_;
  double correction_ = 0.0;
  std::unordered_map<std::uint64_t, double> by_index_;
  std::vector<std::uint64_t> indices_;
  std::vector<double> prefix_;
};

// One-shot convenience wrapper; batch callers should build a
// SummaryEvaluator once.
inline double answer(const Summary& s, const Query& q,
                     WeightMode mode = WeightMode::adjusted) {
  return SummaryEvaluator(s, mode).answer(q);
}

// Exact answers against the original table.
inline double true_answer(const SparseTable& t, const Query& q) {
  switch (q.kind) {
    case QueryKind::point:
      if (q.index >= t.m()) throw std::out_of_range("query outside domain");
      return static_cast<double>(t.count_at(q.index));
    case QueryKind::range: {
      if (q.lo > q.hi || q.hi >= t.m())
        throw std::out_of_range("query outside domain");
      const auto& cells = t.entries();
      auto it = std::lower_bound(
          cells.begin(), cells.end(), q.lo,
          [](const CellEntry& c, std::uint64_t v) { return c.index < v; });
      double total = 0.0;
      for (; it != cells.end() && it->index <= q.hi; ++it)
        total += static_cast<double>(it->count);
      return total;
    }
    case QueryKind::subset: {
      double total = 0.0;
      for (std::uint64_t i : q.subset) {
        if (i >= t.m()) throw std::out_of_range("query outside domain");
        total += static_cast<double>(t.count_at(i));
      }
      return total;
    }
  }
  throw std::logic_error("unreachable");
}

struct ErrorRow {
  std::string id;
  double truth = 0.0;
  double estimate = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;  // abs_err / max(1, |truth|)
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  double mean_abs_err = 0.0;
  double median_abs_err = 0.0;
  double median_rel_err = 0.0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline ErrorReport relative_error(const SparseTable& truth, const Summary& s,
                                  std::span<const Query> queries,
                                  WeightMode mode = WeightMode::adjusted) {
  SummaryEvaluator eval(s, mode);
  ErrorReport rep;
  rep.rows.reserve(queries.size());
  std::vector<double> abs_errs, rel_errs;
  for (const Query& q : queries) {
    ErrorRow row;
    row.id = q.id;
    row.truth = true_answer(truth, q);
    row.estimate = eval.answer(q);
    row.abs_err = std::abs(row.estimate - row.truth);
    row.rel_err = row.abs_err / std::max(1.0, std::abs(row.truth));
    abs_errs.push_back(row.abs_err);
    rel_errs.push_back(row.rel_err);
    rep.rows.push_back(std::move(row));
  }
  if (!rep.rows.empty()) {
    rep.mean_abs_err =
        std::accumulate(abs_errs.begin(), abs_errs.end(), 0.0) /
        static_cast<double>(abs_errs.size());
    rep.median_abs_err = median_of(abs_errs);
    rep.median_rel_err = median_of(rel_errs);
  }
  return rep;
}

// Random query workloads for experiments.
inline std::vector<Query> make_range_queries(std::uint64_t m,
                                             std::uint64_t size,
                                             std::size_t count,
                                             RngHandle& rng) {
  if (size < 1 || size > m)
    throw std::invalid_argument("make_range_queries: size must be in [1, m]");
  std::vector<Query> qs;
  qs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t lo = rng.below(m - size + 1);
    qs.push_back(Query::range(lo, lo + size - 1,
                              "r" + std::to_string(size) + "_" + std::to_string(i)));
  }
  return qs;
}

inline std::vector<Query> make_subset_queries(std::uint64_t m,
                                              std::uint64_t size,
                                              std::size_t count,
                                              RngHandle& rng) {
  if (size < 1 || size > m)
    throw std::invalid_argument("make_subset_queries: size must be in [1, m]");
  std::vector<Query> qs;
  qs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto cells = detail::sample_without_replacement(m, size, rng);
    qs.push_back(Query::subset_of(std::move(cells),
                                  "s" + std::to_string(size) + "_" +
                                      std::to_string(i)));
  }
  return qs;
}

}  // namespace sparsedp

#endif  // SPARSEDP_QUERY_HPP_
