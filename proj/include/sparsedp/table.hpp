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
// Sparse contingency tables over a finite product domain, plus synthetic
// data generation and CSV (de)serialization.

#ifndef SPARSEDP_TABLE_HPP_
#define SPARSEDP_TABLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "sparsedp/rng.hpp"

namespace sparsedp {

// Cross product of per-attribute categorical domains. Cells are addressed
// either by a multi-index (one coordinate per attribute) or by the row-major
// linearization of that multi-index (last attribute varies fastest).
struct DomainSpec {
  std::vector<std::uint64_t> cardinalities;
  std::uint64_t m = 0;  // product of cardinalities

  static DomainSpec of(std::vector<std::uint64_t> cards) {
    if (cards.empty())
      throw std::invalid_argument("DomainSpec: need at least one attribute");
    DomainSpec d;
    d.m = 1;
    for (std::uint64_t c : cards) {
      if (c == 0)
        throw std::invalid_argument("DomainSpec: cardinalities must be >= 1");
      if (d.m > std::numeric_limits<std::uint64_t>::max() / c)
        throw std::invalid_argument("DomainSpec: domain size overflows");
      d.m *= c;
    }
    d.cardinalities = std::move(cards);
    return d;
  }

  // Single flat attribute of m cells.
  static DomainSpec flat(std::uint64_t m) { return of({m}); }

  std::size_t attributes() const { return cardinalities.size(); }

  std::uint64_t linearize(std::span<const std::uint64_t> idx) const {
    if (idx.size() != cardinalities.size())
      throw std::invalid_argument("linearize: wrong number of coordinates");
    std::uint64_t lin = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= cardinalities[a])
        throw std::out_of_range("linearize: coordinate out of range");
      lin = lin * cardinalities[a] + idx[a];
    }
    return lin;
  }

  std::vector<std::uint64_t> delinearize(std::uint64_t lin) const {
    if (lin >= m) throw std::out_of_range("delinearize: index out of range");
    std::vector<std::uint64_t> idx(cardinalities.size());
    for (std::size_t a = cardinalities.size(); a-- > 0;) {
      idx[a] = lin % cardinalities[a];
      lin /= cardinalities[a];
    }
    return idx;
  }

  bool operator==(const DomainSpec& o) const {
    return cardinalities == o.cardinalities;
  }
};

struct CellEntry {
  std::uint64_t index = 0;  // linearized cell index
  std::int64_t count = 0;   // always > 0 in a stored table
};

// Sparse table: only cells with a positive count are stored, sorted by
// linear index. The overwhelming majority of cells are zero by omission.
class SparseTable {
 public:
  SparseTable() : domain_(DomainSpec::flat(1)) {}

  SparseTable(DomainSpec domain, std::vector<CellEntry> cells)
      : domain_(std::move(domain)), cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end(),
              [](const CellEntry& a, const CellEntry& b) {
                return a.index < b.index;
              });
    // Merge duplicate indices by summation, then validate.
    std::size_t w = 0;
    for (std::size_t r = 0; r < cells_.size(); ++r) {
      if (w > 0 && cells_[w - 1].index == cells_[r].index) {
        cells_[w - 1].count += cells_[r].count;
      } else {
        cells_[w++] = cells_[r];
      }
    }
    cells_.resize(w);
    for (const CellEntry& c : cells_) {
      if (c.index >= domain_.m)
        throw std::out_of_range("SparseTable: cell index out of domain");
      if (c.count <= 0)
        throw std::invalid_argument("SparseTable: counts must be positive");
    }
  }

  const DomainSpec& domain() const { return domain_; }
  std::uint64_t m() const { return domain_.m; }
  const std::vector<CellEntry>& entries() const { return cells_; }
  std::size_t nonzero_count() const { return cells_.size(); }

  std::int64_t count_at(std::uint64_t index) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), index,
                               [](const CellEntry& c, std::uint64_t i) {
                                 return c.index < i;
                               });
    return (it != cells_.end() && it->index == index) ? it->count : 0;
  }

  std::uint64_t l1_norm() const {
    std::uint64_t s = 0;
    for (const CellEntry& c : cells_) s += static_cast<std::uint64_t>(c.count);
    return s;
  }

  double density() const {
    return static_cast<double>(cells_.size()) / static_cast<double>(m());
  }

 private:
  DomainSpec domain_;
  std::vector<CellEntry> cells_;
};

struct TableStats {
  std::uint64_t m = 0;
  std::size_t nonzero = 0;
  double density = 0.0;
  std::uint64_t l1 = 0;
  double mean_count = 0.0;
};

inline TableStats table_stats(const SparseTable& t) {
  TableStats s;
  s.m = t.m();
  s.nonzero = t.nonzero_count();
  s.density = t.density();
  s.l1 = t.l1_norm();
  s.mean_count = s.nonzero == 0
                     ? 0.0
                     : static_cast<double>(s.l1) / static_cast<double>(s.nonzero);
  return s;
}

// How the nonzero cells of a synthetic table are placed in the domain.
//  * uniform: a uniform random subset of cells.
//  * skewed:  a contiguous block with within-block density 1/2 (uniform
//             random subset of a block of length min(m, 2*n)), modelling
//             locally clustered populations; range queries over such data
//             are mostly signal-free, which is the regime where dyadic
//             consistency pruning pays off.
enum class Placement { uniform, skewed };

inline std::string to_string(Placement p) {
  return p == Placement::uniform ? "uniform" : "skewed";
}

inline Placement placement_from_string(const std::string& s) {
  if (s == "uniform") return Placement::uniform;
  if (s == "skewed") return Placement::skewed;
  throw std::invalid_argument("unknown placement: " + s);
}

// Recipe for a synthetic table: m cells, about rho*m of them nonzero, with
// counts drawn from round(Normal(mu, sigma)) clamped to >= 1.
struct ExperimentProfile {
  std::uint64_t m = 1'000'000;
  double rho = 0.1;
  double mu = 100.0;
  double sigma = 20.0;
  Placement placement = Placement::uniform;
  std::uint64_t seed = 0;
};

namespace detail {

// Floyd's algorithm: uniform k-subset of [0, universe) without replacement.
inline std::vector<std::uint64_t> sample_without_replacement(
    std::uint64_t universe, std::uint64_t k, RngHandle& rng) {
  if (k > universe)
    throw std::invalid_argument("sample_without_replacement: k > universe");
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k) * 2);
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::uint64_t j = universe - k; j < universe; ++j) {
    std::uint64_t t = rng.below(j + 1);
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace detail

inline SparseTable synth_table(const ExperimentProfile& p, RngHandle& rng) {
  if (p.m == 0) throw std::invalid_argument("synth_table: m must be >= 1");
  auto n_target = static_cast<std::uint64_t>(std::llround(p.rho * static_cast<double>(p.m)));
  if (n_target < 1 || n_target > p.m)
    throw std::invalid_argument("synth_table: rho*m must be in [1, m]");
  if (p.sigma < 0.0) throw std::invalid_argument("synth_table: sigma < 0");

  std::vector<std::uint64_t> locations;
  if (p.placement == Placement::uniform) {
    locations = detail::sample_without_replacement(p.m, n_target, rng);
  } else {
    std::uint64_t block = std::min(p.m, 2 * n_target);
    std::uint64_t start = rng.below(p.m - block + 1);
    locations = detail::sample_without_replacement(block, n_target, rng);
    for (std::uint64_t& loc : locations) loc += start;
  }
  std::sort(locations.begin(), locations.end());

  std::normal_distribution<double> value_dist(p.mu, p.sigma);
  std::vector<CellEntry> cells;
  cells.reserve(locations.size());
  for (std::uint64_t loc : locations) {
    auto v = static_cast<std::int64_t>(std::llround(value_dist(rng.engine())));
    cells.push_back({loc, std::max<std::int64_t>(1, v)});
  }
  return SparseTable(DomainSpec::flat(p.m), std::move(cells));
}

}  // namespace sparsedp

#endif  // SPARSEDP_TABLE_HPP_
