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
// Config-driven experiment runner. Configs are flat key=value files (one
// pair per line, '#' comments); results stream out as CSV. The `experiment`
// key picks the study:
//
//   accuracy     methods x target sizes x query sizes, error statistics
//   equivalence  shortcut-vs-laborious distributional comparison
//   bench        wall-clock per method over a grid of domain sizes
//   dyadic       flat vs dyadic release on range workloads
//   consistency  dyadic filter release with and without ancestor pruning

#ifndef SPARSEDP_EXPERIMENT_HPP_
#define SPARSEDP_EXPERIMENT_HPP_

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedp/dyadic.hpp"
#include "sparsedp/harness.hpp"
#include "sparsedp/io.hpp"
#include "sparsedp/query.hpp"
#include "sparsedp/summarize.hpp"
#include "sparsedp/table.hpp"

namespace sparsedp {

class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::istream& is) {
    ExperimentConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::string_view v = detail::trim(line);
      if (v.empty() || v.front() == '#') continue;
      std::size_t eq = v.find('=');
      if (eq == std::string_view::npos)
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": expected key=value");
      std::string key(detail::trim(v.substr(0, eq)));
      std::string val(detail::trim(v.substr(eq + 1)));
      if (key.empty())
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": empty key");
      c.values_[key] = val;
    }
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& def = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw std::invalid_argument("config is missing required key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : std::stod(it->second);
  }

  std::int64_t get_int(const std::string& key, std::int64_t def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : std::stoll(it->second);
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : std::stoull(it->second);
  }

  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (std::string_view part : detail::split(it->second, ',')) {
      part = detail::trim(part);
      if (!part.empty()) out.emplace_back(part);
    }
    return out;
  }

  std::vector<std::int64_t> get_int_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const std::string& s : get_list(key)) out.push_back(std::stoll(s));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

namespace detail {

inline ExperimentProfile profile_from_config(const ExperimentConfig& c) {
  ExperimentProfile p;
  p.m = c.get_uint("m", p.m);
  if (c.has("n"))
    p.rho = static_cast<double>(c.get_uint("n", 0)) / static_cast<double>(p.m);
  else
    p.rho = c.get_double("rho", p.rho);
  p.mu = c.get_double("mu", p.mu);
  p.sigma = c.get_double("sigma", p.sigma);
  p.placement = placement_from_string(c.get("placement", "uniform"));
  p.seed = c.get_uint("seed", 20260815);
  return p;
}

// Turns (method name, target size or explicit parameters) into MethodParams.
inline MethodParams resolve_method(const std::string& name,
                                   const SparseTable& t, const NoiseSpec& spec,
                                   const ExperimentConfig& c,
                                   std::int64_t target) {
  MethodParams p;
  p.method = summary_method_from_string(name);
  p.theta = c.get_int("theta", -1);
  p.tau = c.get_int("tau", -1);
  p.s = c.get_int("s", -1);
  if (target > 0) {
    double tgt = static_cast<double>(target);
    switch (p.method) {
      case SummaryMethod::filter1:
        p.theta = choose_theta(t.m(), t.nonzero_count(), tgt, spec,
                               FilterSides::one);
        break;
      case SummaryMethod::filter2:
        p.theta = choose_theta(t.m(), t.nonzero_count(), tgt, spec,
                               FilterSides::two);
        break;
      case SummaryMethod::threshold:
        p.tau = choose_tau(t, tgt, spec);
        break;
      case SummaryMethod::priority:
        p.s = target;
        break;
      case SummaryMethod::filter_priority:
        p.s = target;
        if (p.theta < 1)
          throw std::invalid_argument(
              "filter-priority with target requires an explicit theta");
        break;
      case SummaryMethod::filter_threshold:
        p.tau = choose_tau(t, tgt, spec);
        if (p.theta < 0) p.theta = 0;
        break;
      case SummaryMethod::geometric_full:
        break;
    }
  }
  return p;
}

inline void run_accuracy(const ExperimentConfig& c, std::ostream& out) {
  ExperimentProfile prof = profile_from_config(c);
  RngHandle rng(prof.seed);
  RngHandle table_rng = rng.fork("table");
  SparseTable t = synth_table(prof, table_rng);
  NoiseSpec spec = NoiseSpec::make(c.get_double("epsilon", 0.1),
                                   c.get_int("sensitivity", 1));
  auto methods = c.get_list("methods");
  if (methods.empty()) methods = {c.require("method")};
  std::vector<std::int64_t> targets = c.get_int_list("targets");
  if (targets.empty()) targets = {c.get_int("target", 0)};
  std::vector<std::int64_t> query_sizes = c.get_int_list("query_sizes");
  if (query_sizes.empty()) query_sizes = {1000};
  const auto queries_per_size =
      static_cast<std::size_t>(c.get_int("queries", 100));
  const auto reps = static_cast<std::size_t>(c.get_int("reps", 3));
  const bool subset = c.get("query_kind", "range") == "subset";

  out << "method,target,rep,entries,query_kind,query_size,median_rel_err,"
         "mean_abs_err\n";
  for (const std::string& name : methods) {
    for (std::int64_t target : targets) {
      MethodParams p = resolve_method(name, t, spec, c, target);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        RngHandle gen = rng.fork(name + "/" + std::to_string(target) + "/" +
                                 std::to_string(rep));
        Summary s = run_shortcut(t, p, spec, gen);
        RngHandle qrng = rng.fork("queries/" + std::to_string(rep));
        for (std::int64_t qs : query_sizes) {
          auto queries =
              subset ? make_subset_queries(t.m(), static_cast<std::uint64_t>(qs),
                                           queries_per_size, qrng)
                     : make_range_queries(t.m(), static_cast<std::uint64_t>(qs),
                                          queries_per_size, qrng);
          ErrorReport er = relative_error(t, s, queries);
          out << name << "," << target << "," << rep << ","
              << s.entries.size() << "," << (subset ? "subset" : "range")
              << "," << qs << "," << er.median_rel_err << "," << er.mean_abs_err
              << "\n";
        }
      }
    }
  }
}

inline void run_equivalence(const ExperimentConfig& c, std::ostream& out) {
  ExperimentProfile prof = profile_from_config(c);
  RngHandle rng(prof.seed);
  RngHandle table_rng = rng.fork("table");
  SparseTable t = synth_table(prof, table_rng);
  NoiseSpec spec = NoiseSpec::make(c.get_double("epsilon", 0.5),
                                   c.get_int("sensitivity", 1));
  MethodParams p = resolve_method(c.require("method"), t, spec, c, 0);
  auto trials = static_cast<std::size_t>(c.get_int("trials", 5000));
  RngHandle eq_rng = rng.fork("equivalence");
  EquivalenceReport rep = equivalence_test(t, p, spec, trials, eq_rng);
  out << "method,trials,ks_stat,ks_p,size_chi2_stat,size_chi2_p,"
         "upgraded_chi2_stat,upgraded_chi2_p,max_inclusion_z,"
         "mean_size_shortcut,mean_size_laborious\n";
  out << to_string(p.method) << "," << rep.trials << "," << rep.values_ks.stat
      << "," << rep.values_ks.p_value << "," << rep.size_chi2.stat << ","
      << rep.size_chi2.p_value << "," << rep.upgraded_chi2.stat << ","
      << rep.upgraded_chi2.p_value << "," << rep.max_inclusion_z << ","
      << rep.mean_size_shortcut << "," << rep.mean_size_laborious << "\n";
}

inline void run_bench(const ExperimentConfig& c, std::ostream& out) {
  NoiseSpec spec = NoiseSpec::make(c.get_double("epsilon", 0.1),
                                   c.get_int("sensitivity", 1));
  auto m_list = c.get_int_list("m_list");
  if (m_list.empty()) m_list = {1 << 16, 1 << 18, 1 << 20};
  auto methods = c.get_list("methods");
  if (methods.empty()) methods = {"filter2", "threshold", "priority"};
  const double rho = c.get_double("rho", 0.01);
  const int repeats = static_cast<int>(c.get_int("repeats", 3));
  const bool laborious = c.get_int("laborious", 0) != 0;
  RngHandle rng(c.get_uint("seed", 20260815));

  out << "label,m,n,target,wall_ms,out_entries\n";
  for (std::int64_t m : m_list) {
    ExperimentProfile prof;
    prof.m = static_cast<std::uint64_t>(m);
    prof.rho = rho;
    RngHandle trng = rng.fork("table/" + std::to_string(m));
    SparseTable t = synth_table(prof, trng);
    std::int64_t target = c.get_int("target", static_cast<std::int64_t>(
                                                  t.nonzero_count()));
    std::vector<MethodParams> params;
    for (const std::string& name : methods)
      params.push_back(resolve_method(name, t, spec, c, target));
    RngHandle brng = rng.fork("bench/" + std::to_string(m));
    for (const BenchRow& row :
         bench_throughput(t, params, spec, brng, repeats, laborious)) {
      out << row.label << "," << row.m << "," << row.n << "," << target << ","
          << row.wall_ms << "," << row.out_entries << "\n";
    }
  }
}

inline void run_dyadic(const ExperimentConfig& c, std::ostream& out) {
  ExperimentProfile prof = profile_from_config(c);
  RngHandle rng(prof.seed);
  RngHandle table_rng = rng.fork("table");
  SparseTable t = synth_table(prof, table_rng);
  NoiseSpec spec = NoiseSpec::make(c.get_double("epsilon", 0.1),
                                   c.get_int("sensitivity", 1));
  MethodParams p = resolve_method(c.get("method", "geometric-full"), t, spec,
                                  c, c.get_int("target", 0));
  auto range_sizes = c.get_int_list("range_sizes");
  if (range_sizes.empty()) range_sizes = {10000, 100000};
  const auto queries_per_size =
      static_cast<std::size_t>(c.get_int("queries", 50));
  const auto reps = static_cast<std::size_t>(c.get_int("reps", 3));

  out << "route,rep,range_size,mean_abs_err,median_rel_err\n";
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngHandle flat_rng = rng.fork("flat/" + std::to_string(rep));
    Summary flat = laborious_path(t, {SummaryMethod::geometric_full}, spec,
                                  flat_rng);
    RngHandle dy_rng = rng.fork("dyadic/" + std::to_string(rep));
    Summary dy = summarize_dyadic(t, p, spec, dy_rng);
    RngHandle qrng = rng.fork("queries/" + std::to_string(rep));
    for (std::int64_t rs : range_sizes) {
      auto queries = make_range_queries(
          t.m(), static_cast<std::uint64_t>(rs), queries_per_size, qrng);
      ErrorReport ef = relative_error(t, flat, queries);
      ErrorReport ed = relative_error(t, dy, queries);
      out << "flat," << rep << "," << rs << "," << ef.mean_abs_err << ","
          << ef.median_rel_err << "\n";
      out << "dyadic," << rep << "," << rs << "," << ed.mean_abs_err << ","
          << ed.median_rel_err << "\n";
    }
  }
}

inline void run_consistency(const ExperimentConfig& c, std::ostream& out) {
  ExperimentProfile prof = profile_from_config(c);
  if (!c.has("placement")) prof.placement = Placement::skewed;
  RngHandle rng(prof.seed);
  RngHandle table_rng = rng.fork("table");
  SparseTable t = synth_table(prof, table_rng);
  NoiseSpec spec = NoiseSpec::make(c.get_double("epsilon", 0.1),
                                   c.get_int("sensitivity", 1));
  MethodParams p;
  p.method = summary_method_from_string(c.get("method", "filter2"));
  p.theta = c.get_int("theta", 50);
  auto range_sizes = c.get_int_list("range_sizes");
  if (range_sizes.empty()) range_sizes = {10000, 100000};
  const auto queries_per_size =
      static_cast<std::size_t>(c.get_int("queries", 50));
  const auto reps = static_cast<std::size_t>(c.get_int("reps", 5));

  out << "rep,range_size,entries_raw,entries_pruned,median_abs_raw,"
         "median_abs_pruned,reduction\n";
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngHandle gen = rng.fork("gen/" + std::to_string(rep));
    Summary raw = summarize_dyadic(t, p, spec, gen, /*consistency=*/false);
    Summary pruned = consistency_prune(raw);
    RngHandle qrng = rng.fork("queries/" + std::to_string(rep));
    for (std::int64_t rs : range_sizes) {
      auto queries = make_range_queries(
          t.m(), static_cast<std::uint64_t>(rs), queries_per_size, qrng);
      ErrorReport eraw = relative_error(t, raw, queries);
      ErrorReport epruned = relative_error(t, pruned, queries);
      double reduction =
          eraw.median_abs_err > 0.0
              ? 1.0 - epruned.median_abs_err / eraw.median_abs_err
              : 0.0;
      out << rep << "," << rs << "," << raw.entries.size() << ","
          << pruned.entries.size() << "," << eraw.median_abs_err << ","
          << epruned.median_abs_err << "," << reduction << "\n";
    }
  }
}

}  // namespace detail

inline void run_experiment(const ExperimentConfig& c, std::ostream& out) {
  const std::string kind = c.require("experiment");
  if (kind == "accuracy") return detail::run_accuracy(c, out);
  if (kind == "equivalence") return detail::run_equivalence(c, out);
  if (kind == "bench") return detail::run_bench(c, out);
  if (kind == "dyadic") return detail::run_dyadic(c, out);
  if (kind == "consistency") return detail::run_consistency(c, out);
  throw std::invalid_argument("unknown experiment '" + kind + "'");
}

}  // namespace sparsedp

#endif  // SPARSEDP_EXPERIMENT_HPP_
