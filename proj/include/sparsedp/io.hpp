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
// File formats. All artifacts are line-oriented CSV with `#` comment lines;
// the first comment line carries a JSON metadata object. Doubles are printed
// in shortest round-trip form, so write(read(file)) reproduces the file
// byte for byte.

#ifndef SPARSEDP_IO_HPP_
#define SPARSEDP_IO_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsedp/dyadic.hpp"
#include "sparsedp/query.hpp"
#include "sparsedp/sketch.hpp"
#include "sparsedp/summary.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

using OrderedJson = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc())
    throw std::logic_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("line " + std::to_string(line) + ": bad number '" +
                  std::string(s) + "'");
  return v;
}

template <typename Int>
inline Int parse_int(std::string_view s, std::size_t line) {
  Int v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("line " + std::to_string(line) + ": bad integer '" +
                  std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// First `# {...}` comment line, if any, parsed as JSON.
inline std::optional<OrderedJson> take_metadata(const std::string& line) {
  std::string_view v = trim(line);
  if (v.empty() || v.front() != '#') return std::nullopt;
  v.remove_prefix(1);
  v = trim(v);
  if (v.empty() || v.front() != '{') return std::nullopt;
  OrderedJson j = OrderedJson::parse(v, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sparse tables
//
//   # {"cardinalities":[...]}
//   <linear index>,<count>            (2 columns), or
//   <i1>,...,<ik>,<count>             (k+1 columns, k = #attributes)

inline void save_sparse_table(const SparseTable& t, std::ostream& os) {
  OrderedJson meta;
  meta["cardinalities"] = t.domain().cardinalities;
  os << "# " << meta.dump() << "\n";
  for (const CellEntry& c : t.entries()) os << c.index << "," << c.count << "\n";
}

inline SparseTable load_sparse_table(
    std::istream& is, std::optional<DomainSpec> domain = std::nullopt) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<CellEntry> cells;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = detail::trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      if (!domain) {
        if (auto meta = detail::take_metadata(line)) {
          if (!meta->contains("cardinalities"))
            throw IoError("table metadata lacks 'cardinalities'");
          domain = DomainSpec::of(
              meta->at("cardinalities").get<std::vector<std::uint64_t>>());
        }
      }
      continue;
    }
    if (!domain)
      throw IoError("line " + std::to_string(lineno) +
                    ": data before any domain metadata");
    auto parts = detail::split(v, ',');
    std::uint64_t index;
    if (parts.size() == 2) {
      index = detail::parse_int<std::uint64_t>(detail::trim(parts[0]), lineno);
    } else if (parts.size() == domain->attributes() + 1) {
      std::vector<std::uint64_t> multi;
      for (std::size_t a = 0; a + 1 < parts.size(); ++a)
        multi.push_back(
            detail::parse_int<std::uint64_t>(detail::trim(parts[a]), lineno));
      try {
        index = domain->linearize(multi);
      } catch (const std::exception& e) {
        throw IoError("line " + std::to_string(lineno) + ": " + e.what());
      }
    } else {
      throw IoError("line " + std::to_string(lineno) + ": expected 2 or " +
                    std::to_string(domain->attributes() + 1) + " columns");
    }
    auto count = detail::parse_int<std::int64_t>(detail::trim(parts.back()), lineno);
    if (count <= 0)
      throw IoError("line " + std::to_string(lineno) +
                    ": counts must be positive");
    if (index >= domain->m)
      throw IoError("line " + std::to_string(lineno) + ": index " +
                    std::to_string(index) + " outside domain of size " +
                    std::to_string(domain->m));
    cells.push_back({index, count});
  }
  if (!domain) throw IoError("table file has no domain metadata");
  return SparseTable(*domain, std::move(cells));
}

// ---------------------------------------------------------------------------
// Summaries
//
//   # {"method":...,"epsilon":...,...}
//   <index>,<value>,<adjusted_weight>
//
// Dyadic summaries address entries as <level>:<offset>.

inline OrderedJson summary_metadata(const Summary& s) {
  OrderedJson meta;
  meta["method"] = to_string(s.method);
  meta["epsilon"] = s.noise.epsilon;
  meta["sensitivity"] = s.noise.sensitivity;
  meta["alpha"] = s.noise.alpha;
  meta["m"] = s.m;
  meta["n"] = s.source_nonzero;
  meta["theta"] = s.theta >= 0 ? OrderedJson(s.theta) : OrderedJson(nullptr);
  meta["tau"] = s.tau >= 0 ? OrderedJson(s.tau) : OrderedJson(nullptr);
  meta["s"] = s.sample_size >= 0 ? OrderedJson(s.sample_size)
                                 : OrderedJson(nullptr);
  meta["tau_s"] = s.tau_s > 0.0 ? OrderedJson(s.tau_s) : OrderedJson(nullptr);
  meta["seed"] = s.seed;
  meta["dyadic"] = s.dyadic;
  meta["height"] = s.dyadic ? OrderedJson(s.height) : OrderedJson(nullptr);
  meta["leaf_m"] = s.dyadic ? OrderedJson(s.leaf_m) : OrderedJson(nullptr);
  return meta;
}

inline void write_summary(const Summary& s, std::ostream& os) {
  os << "# " << summary_metadata(s).dump() << "\n";
  for (const SummaryEntry& e : s.entries) {
    if (s.dyadic) {
      DyadicNode n = node_from_linear(s.height, e.index);
      os << n.level << ":" << n.offset;
    } else {
      os << e.index;
    }
    os << "," << e.value << "," << detail::format_double(e.adjusted_weight)
       << "\n";
  }
}

inline Summary read_summary(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  Summary s;
  bool have_meta = false;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = detail::trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      if (have_meta) continue;
      auto meta = detail::take_metadata(line);
      if (!meta) continue;
      have_meta = true;
      const OrderedJson& j = *meta;
      s.method = summary_method_from_string(j.at("method").get<std::string>());
      s.noise = NoiseSpec::make(j.at("epsilon").get<double>(),
                                j.at("sensitivity").get<std::int64_t>());
      s.m = j.at("m").get<std::uint64_t>();
      s.source_nonzero = j.at("n").get<std::uint64_t>();
      if (!j.at("theta").is_null()) s.theta = j.at("theta").get<std::int64_t>();
      if (!j.at("tau").is_null()) s.tau = j.at("tau").get<std::int64_t>();
      if (!j.at("s").is_null()) s.sample_size = j.at("s").get<std::int64_t>();
      if (!j.at("tau_s").is_null()) s.tau_s = j.at("tau_s").get<double>();
      s.seed = j.at("seed").get<std::uint64_t>();
      s.dyadic = j.at("dyadic").get<bool>();
      if (s.dyadic) {
        s.height = j.at("height").get<int>();
        s.leaf_m = j.at("leaf_m").get<std::uint64_t>();
      }
      continue;
    }
    if (!have_meta)
      throw IoError("line " + std::to_string(lineno) +
                    ": summary data before metadata");
    auto parts = detail::split(v, ',');
    if (parts.size() != 3)
      throw IoError("line " + std::to_string(lineno) +
                    ": expected index,value,adjusted_weight");
    SummaryEntry e;
    std::string_view idx = detail::trim(parts[0]);
    if (s.dyadic) {
      auto lv = detail::split(idx, ':');
      if (lv.size() != 2)
        throw IoError("line " + std::to_string(lineno) +
                      ": dyadic index must be level:offset");
      DyadicNode n{detail::parse_int<int>(detail::trim(lv[0]), lineno),
                   detail::parse_int<std::uint64_t>(detail::trim(lv[1]), lineno)};
      if (n.level > s.height)
        throw IoError("line " + std::to_string(lineno) +
                      ": node level exceeds tree height");
      e.index = node_linear_index(s.height, n);
    } else {
      e.index = detail::parse_int<std::uint64_t>(idx, lineno);
      if (e.index >= s.m)
        throw IoError("line " + std::to_string(lineno) +
                      ": entry index outside domain");
    }
    e.value = detail::parse_int<std::int64_t>(detail::trim(parts[1]), lineno);
    e.adjusted_weight = detail::parse_double(detail::trim(parts[2]), lineno);
    s.entries.push_back(e);
  }
  if (!have_meta) throw IoError("summary file has no metadata line");
  for (std::size_t i = 1; i < s.entries.size(); ++i)
    if (s.entries[i - 1].index >= s.entries[i].index)
      throw IoError("summary entries must be sorted by index and distinct");
  return s;
}

// ---------------------------------------------------------------------------
// Query workloads
//
//   P,<i>                  point
//   R,<lo>,<hi>            inclusive range
//   S,<i1> <i2> <i3> ...   subset (space-separated)

inline std::vector<Query> load_queries(std::istream& is) {
  std::vector<Query> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = detail::trim(line);
    if (v.empty() || v.front() == '#') continue;
    auto parts = detail::split(v, ',');
    std::string id = "q" + std::to_string(out.size() + 1);
    std::string_view tag = detail::trim(parts[0]);
    if (tag == "P" && parts.size() == 2) {
      out.push_back(Query::point(
          detail::parse_int<std::uint64_t>(detail::trim(parts[1]), lineno), id));
    } else if (tag == "R" && parts.size() == 3) {
      auto lo = detail::parse_int<std::uint64_t>(detail::trim(parts[1]), lineno);
      auto hi = detail::parse_int<std::uint64_t>(detail::trim(parts[2]), lineno);
      if (lo > hi)
        throw IoError("line " + std::to_string(lineno) + ": range lo > hi");
      out.push_back(Query::range(lo, hi, id));
    } else if (tag == "S" && parts.size() == 2) {
      std::vector<std::uint64_t> cells;
      for (std::string_view f : detail::split(detail::trim(parts[1]), ' ')) {
        f = detail::trim(f);
        if (f.empty()) continue;
        cells.push_back(detail::parse_int<std::uint64_t>(f, lineno));
      }
      if (cells.empty())
        throw IoError("line " + std::to_string(lineno) + ": empty subset");
      out.push_back(Query::subset_of(std::move(cells), id));
    } else {
      throw IoError("line " + std::to_string(lineno) +
                    ": expected P,<i> or R,<lo>,<hi> or S,<cells>");
    }
  }
  return out;
}

inline void write_error_report(const ErrorReport& rep, std::ostream& os) {
  OrderedJson meta;
  meta["queries"] = rep.rows.size();
  meta["mean_abs_err"] = rep.mean_abs_err;
  meta["median_abs_err"] = rep.median_abs_err;
  meta["median_rel_err"] = rep.median_rel_err;
  os << "# " << meta.dump() << "\n";
  os << "query_id,truth,estimate,abs_err,rel_err\n";
  for (const ErrorRow& r : rep.rows) {
    os << r.id << "," << detail::format_double(r.truth) << ","
       << detail::format_double(r.estimate) << ","
       << detail::format_double(r.abs_err) << ","
       << detail::format_double(r.rel_err) << "\n";
  }
}

inline void write_answers(const std::vector<std::pair<std::string, double>>& answers,
                          std::ostream& os) {
  os << "query_id,estimate\n";
  for (const auto& [id, est] : answers)
    os << id << "," << detail::format_double(est) << "\n";
}

// ---------------------------------------------------------------------------
// Sketches: metadata line, then one line of width space-separated bucket
// values per row.

inline void write_sketch(const PrivateSketch& sk, std::ostream& os) {
  OrderedJson meta;
  meta["width"] = sk.width;
  meta["depth"] = sk.depth;
  meta["m"] = sk.m;
  meta["epsilon"] = sk.base_epsilon;
  meta["base_sensitivity"] = sk.noise.sensitivity / (2 * static_cast<std::int64_t>(sk.depth));
  meta["hash_a"] = sk.hash_a;
  meta["hash_b"] = sk.hash_b;
  meta["sign_a"] = sk.sign_a;
  meta["sign_b"] = sk.sign_b;
  os << "# " << meta.dump() << "\n";
  for (std::uint32_t j = 0; j < sk.depth; ++j) {
    for (std::uint32_t k = 0; k < sk.width; ++k) {
      if (k) os << " ";
      os << sk.buckets[static_cast<std::size_t>(j) * sk.width + k];
    }
    os << "\n";
  }
}

inline PrivateSketch read_sketch(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  PrivateSketch sk;
  bool have_meta = false;
  std::size_t rows_read = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = detail::trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      if (have_meta) continue;
      auto meta = detail::take_metadata(line);
      if (!meta) continue;
      have_meta = true;
      sk.width = meta->at("width").get<std::uint32_t>();
      sk.depth = meta->at("depth").get<std::uint32_t>();
      sk.m = meta->at("m").get<std::uint64_t>();
      sk.base_epsilon = meta->at("epsilon").get<double>();
      auto base_sens = meta->at("base_sensitivity").get<std::int64_t>();
      sk.noise = NoiseSpec::make(sk.base_epsilon,
                                 base_sens * 2 * static_cast<std::int64_t>(sk.depth));
      sk.hash_a = meta->at("hash_a").get<std::vector<std::uint64_t>>();
      sk.hash_b = meta->at("hash_b").get<std::vector<std::uint64_t>>();
      sk.sign_a = meta->at("sign_a").get<std::vector<std::uint64_t>>();
      sk.sign_b = meta->at("sign_b").get<std::vector<std::uint64_t>>();
      sk.buckets.reserve(static_cast<std::size_t>(sk.width) * sk.depth);
      continue;
    }
    if (!have_meta)
      throw IoError("line " + std::to_string(lineno) + ": sketch data before metadata");
    for (std::string_view f : detail::split(v, ' ')) {
      f = detail::trim(f);
      if (f.empty()) continue;
      sk.buckets.push_back(detail::parse_int<std::int64_t>(f, lineno));
    }
    ++rows_read;
  }
  if (!have_meta) throw IoError("sketch file has no metadata line");
  if (rows_read != sk.depth ||
      sk.buckets.size() != static_cast<std::size_t>(sk.width) * sk.depth)
    throw IoError("sketch bucket grid does not match width x depth");
  return sk;
}

// ---------------------------------------------------------------------------
// Filesystem convenience wrappers.

template <typename T, typename Loader>
inline T load_file(const std::string& path, Loader&& loader) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  try {
    return loader(f);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

template <typename Writer>
inline void save_file(const std::string& path, Writer&& writer) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  writer(f);
  if (!f) throw IoError("write to " + path + " failed");
}

inline SparseTable load_table_file(const std::string& path) {
  return load_file<SparseTable>(
      path, [](std::istream& is) { return load_sparse_table(is); });
}

inline void save_table_file(const SparseTable& t, const std::string& path) {
  save_file(path, [&](std::ostream& os) { save_sparse_table(t, os); });
}

inline Summary read_summary_file(const std::string& path) {
  return load_file<Summary>(path,
                            [](std::istream& is) { return read_summary(is); });
}

inline void write_summary_file(const Summary& s, const std::string& path) {
  save_file(path, [&](std::ostream& os) { write_summary(s, os); });
}

inline std::vector<Query> load_queries_file(const std::string& path) {
  return load_file<std::vector<Query>>(
      path, [](std::istream& is) { return load_queries(is); });
}

inline PrivateSketch read_sketch_file(const std::string& path) {
  return load_file<PrivateSketch>(
      path, [](std::istream& is) { return read_sketch(is); });
}

inline void write_sketch_file(const PrivateSketch& sk, const std::string& path) {
  save_file(path, [&](std::ostream& os) { write_sketch(sk, os); });
}

}  // namespace sparsedp

#endif  // SPARSEDP_IO_HPP_
