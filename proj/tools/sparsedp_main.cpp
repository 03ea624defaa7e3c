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
// sparsedp: batch anonymization of sparse contingency tables.
//
//   sparsedp synth      generate a synthetic table
//   sparsedp anonymize  release a privacy-protected summary of a table
//   sparsedp query      answer point/range/subset queries from a summary
//   sparsedp verify     check a shortcut against the naive pipeline
//   sparsedp bench      wall-clock comparison across methods/domain sizes
//
// Exit status: 0 success, 1 data or runtime error, 2 usage error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsedp/dyadic.hpp"
#include "sparsedp/harness.hpp"
#include "sparsedp/io.hpp"
#include "sparsedp/query.hpp"
#include "sparsedp/summarize.hpp"
#include "sparsedp/table.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 20260815;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seeds default to a fixed constant so runs are reproducible unless the user
// explicitly asks for entropy with --seed random.
std::uint64_t resolve_seed(const std::string& seed_arg) {
  if (seed_arg == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(seed_arg, &pos);
    if (pos != seed_arg.size()) throw std::invalid_argument(seed_arg);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--seed must be an unsigned integer or 'random'");
  }
}

struct AnonymizeArgs {
  std::string in, out;
  std::string method;
  double epsilon = 0.0;
  std::int64_t sensitivity = 1;
  std::int64_t theta = -1;
  std::int64_t tau = -1;
  std::int64_t s = -1;
  std::int64_t target_size = -1;
  bool dyadic = false;
  bool consistency = false;
  std::string seed_arg = std::to_string(kDefaultSeed);
#ifdef SPARSEDP_VERIFICATION_BUILD
  std::string debug_origin_out;
#endif
};

int cmd_anonymize(const AnonymizeArgs& a) {
  using namespace sparsedp;
  const SummaryMethod method = summary_method_from_string(a.method);

  if (a.target_size >= 0) {
    if (a.theta >= 0 || a.tau >= 0 || a.s >= 0)
      throw UsageError("--target-size is mutually exclusive with --theta/--tau/--size");
    if (method != SummaryMethod::filter1 && method != SummaryMethod::filter2 &&
        method != SummaryMethod::threshold)
      throw UsageError("--target-size supports only filter1, filter2 and threshold");
    if (a.target_size < 1) throw UsageError("--target-size must be >= 1");
  } else {
    auto need = [](bool ok, const char* msg) {
      if (!ok) throw UsageError(msg);
    };
    switch (method) {
      case SummaryMethod::filter1:
      case SummaryMethod::filter2:
        need(a.theta >= 1, "filter methods require --theta >= 1");
        break;
      case SummaryMethod::threshold:
        need(a.tau >= 1, "threshold requires --tau >= 1");
        break;
      case SummaryMethod::filter_threshold:
        need(a.tau >= 1 && a.theta >= 0 && a.theta < a.tau,
             "filter-threshold requires 0 <= --theta < --tau");
        break;
      case SummaryMethod::priority:
        need(a.s >= 1, "priority requires --size >= 1");
        break;
      case SummaryMethod::filter_priority:
        need(a.theta >= 1 && a.s >= 1,
             "filter-priority requires --theta >= 1 and --size >= 1");
        break;
      case SummaryMethod::geometric_full:
        break;
    }
  }
  if (a.consistency) {
    if (!a.dyadic) throw UsageError("--consistency requires --dyadic");
    if (method != SummaryMethod::filter1 && method != SummaryMethod::filter2 &&
        method != SummaryMethod::filter_priority)
      throw UsageError(
          "--consistency requires a filter-based method "
          "(filter1, filter2 or filter-priority)");
  }

  const std::uint64_t seed = resolve_seed(a.seed_arg);
  SparseTable table = load_table_file(a.in);
  NoiseSpec spec = NoiseSpec::make(a.epsilon, a.sensitivity);
  RngHandle rng(seed);

  MethodParams params;
  params.method = method;
  params.theta = a.theta;
  params.tau = a.tau;
  params.s = a.s;
  if (a.target_size >= 0) {
    // Auto-chosen parameters are echoed back through the summary metadata.
    double t = static_cast<double>(a.target_size);
    if (method == SummaryMethod::threshold) {
      params.tau = choose_tau(table, t, spec);
    } else {
      NoiseSpec pick = a.dyadic ? dyadic_noise_spec(spec, table.m()) : spec;
      params.theta = choose_theta(
          table.m(), table.nonzero_count(), t, pick,
          method == SummaryMethod::filter1 ? FilterSides::one : FilterSides::two);
    }
  }

  Summary summary =
      a.dyadic ? summarize_dyadic(table, params, spec, rng, a.consistency)
               : run_shortcut(table, params, spec, rng);
  summary.seed = seed;
  write_summary_file(summary, a.out);

#ifdef SPARSEDP_VERIFICATION_BUILD
  if (!a.debug_origin_out.empty()) {
    save_file(a.debug_origin_out, [&](std::ostream& os) {
      os << "index,origin\n";
      for (const SummaryEntry& e : summary.entries)
        os << e.index << ","
           << (e.origin == EntryOrigin::upgraded_zero ? "upgraded-zero"
                                                      : "nonzero")
           << "\n";
    });
  }
#endif
  return 0;
}

struct QueryArgs {
  std::string summary_path, queries_path, table_path, out;
  std::string weights = "adjusted";
};

int cmd_query(const QueryArgs& a) {
  using namespace sparsedp;
  Summary s = read_summary_file(a.summary_path);
  std::vector<Query> queries = load_queries_file(a.queries_path);
  WeightMode mode = weight_mode_from_string(a.weights);

  std::ostringstream body;
  if (!a.table_path.empty()) {
    SparseTable t = load_table_file(a.table_path);
    write_error_report(relative_error(t, s, queries, mode), body);
  } else {
    SummaryEvaluator eval(s, mode);
    std::vector<std::pair<std::string, double>> answers;
    answers.reserve(queries.size());
    for (const Query& q : queries) answers.emplace_back(q.id, eval.answer(q));
    write_answers(answers, body);
  }
  if (a.out.empty() || a.out == "-") {
    std::cout << body.str();
  } else {
    save_file(a.out, [&](std::ostream& os) { os << body.str(); });
  }
  return 0;
}

struct VerifyArgs {
  std::uint64_t m = 4096;
  std::uint64_t n = 128;
  double epsilon = 0.5;
  std::int64_t sensitivity = 1;
  std::string method = "filter2";
  std::int64_t theta = 3;
  std::int64_t tau = 5;
  std::int64_t s = 64;
  std::size_t trials = 5000;
  double significance = 0.001;
  std::string seed_arg = std::to_string(kDefaultSeed);
};

int cmd_verify(const VerifyArgs& a) {
  using namespace sparsedp;
  ExperimentProfile prof;
  prof.m = a.m;
  prof.rho = static_cast<double>(a.n) / static_cast<double>(a.m);
  prof.mu = 20.0;
  prof.sigma = 5.0;
  prof.seed = resolve_seed(a.seed_arg);
  RngHandle rng(prof.seed);
  RngHandle table_rng = rng.fork("table");
  SparseTable table = synth_table(prof, table_rng);
  NoiseSpec spec = NoiseSpec::make(a.epsilon, a.sensitivity);

  MethodParams p;
  p.method = summary_method_from_string(a.method);
  p.theta = a.theta;
  p.tau = a.tau;
  p.s = a.s;

  // A correct implementation still fails a significance-alpha check with
  // probability ~alpha, so one fresh-seed retry is allowed.
  bool pass = false;
  EquivalenceReport rep;
  for (std::uint64_t attempt = 0; attempt < 2 && !pass; ++attempt) {
    RngHandle er = rng.fork("equivalence/" + std::to_string(attempt));
    rep = equivalence_test(table, p, spec, a.trials, er);
    pass = rep.passes(a.significance);
  }

  std::cout << "method=" << p.describe() << " trials=" << rep.trials << "\n"
            << "upgraded-zero values: KS=" << rep.values_ks.stat
            << " p=" << rep.values_ks.p_value << "\n"
            << "summary sizes: chi2=" << rep.size_chi2.stat
            << " p=" << rep.size_chi2.p_value
            << (rep.sizes_degenerate ? " (degenerate: fixed size)" : "") << "\n"
            << "upgraded-zero counts: chi2=" << rep.upgraded_chi2.stat
            << " p=" << rep.upgraded_chi2.p_value << "\n"
            << "per-cell inclusion: max z=" << rep.max_inclusion_z
            << " cells>4se=" << rep.cells_over_4se << "\n"
            << "mean size shortcut=" << rep.mean_size_shortcut
            << " laborious=" << rep.mean_size_laborious << "\n"
            << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

struct BenchArgs {
  std::vector<std::uint64_t> m_list{1 << 16, 1 << 18, 1 << 20};
  double rho = 0.01;
  double epsilon = 0.1;
  std::vector<std::string> methods{"filter2", "threshold", "priority"};
  std::int64_t target = -1;
  int repeats = 3;
  bool laborious = false;
  std::string out;
  std::string seed_arg = std::to_string(kDefaultSeed);
};

int cmd_bench(const BenchArgs& a) {
  using namespace sparsedp;
  RngHandle rng(resolve_seed(a.seed_arg));
  NoiseSpec spec = NoiseSpec::make(a.epsilon, 1);

  std::ostringstream body;
  body << "label,m,n,wall_ms,out_entries\n";
  for (std::uint64_t m : a.m_list) {
    ExperimentProfile prof;
    prof.m = m;
    prof.rho = a.rho;
    RngHandle trng = rng.fork("table/" + std::to_string(m));
    SparseTable t = synth_table(prof, trng);
    double target = a.target > 0 ? static_cast<double>(a.target)
                                 : static_cast<double>(t.nonzero_count());
    std::vector<MethodParams> params;
    for (const std::string& name : a.methods) {
      MethodParams p;
      p.method = summary_method_from_string(name);
      switch (p.method) {
        case SummaryMethod::filter1:
          p.theta = choose_theta(t.m(), t.nonzero_count(), target, spec,
                                 FilterSides::one);
          break;
        case SummaryMethod::filter2:
          p.theta = choose_theta(t.m(), t.nonzero_count(), target, spec,
                                 FilterSides::two);
          break;
        case SummaryMethod::threshold:
          p.tau = choose_tau(t, target, spec);
          break;
        case SummaryMethod::priority:
          p.s = static_cast<std::int64_t>(target);
          break;
        case SummaryMethod::filter_priority:
          p.theta = choose_theta(t.m(), t.nonzero_count(), target, spec,
                                 FilterSides::two);
          p.s = static_cast<std::int64_t>(target);
          break;
        case SummaryMethod::filter_threshold:
          p.theta = 0;
          p.tau = choose_tau(t, target, spec);
          break;
        case SummaryMethod::geometric_full:
          break;
      }
      params.push_back(p);
    }
    RngHandle brng = rng.fork("bench/" + std::to_string(m));
    for (const BenchRow& row :
         bench_throughput(t, params, spec, brng, a.repeats, a.laborious)) {
      body << row.label << "," << row.m << "," << row.n << "," << row.wall_ms
           << "," << row.out_entries << "\n";
    }
  }
  if (a.out.empty() || a.out == "-") {
    std::cout << body.str();
  } else {
    sparsedp::save_file(a.out, [&](std::ostream& os) { os << body.str(); });
  }
  return 0;
}

struct SynthArgs {
  std::uint64_t m = 1'000'000;
  double rho = 0.1;
  std::int64_t n = -1;
  double mu = 100.0;
  double sigma = 20.0;
  std::string placement = "uniform";
  std::string seed_arg = std::to_string(kDefaultSeed);
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  using namespace sparsedp;
  ExperimentProfile prof;
  prof.m = a.m;
  prof.rho = a.n >= 0
                 ? static_cast<double>(a.n) / static_cast<double>(a.m)
                 : a.rho;
  prof.mu = a.mu;
  prof.sigma = a.sigma;
  prof.placement = placement_from_string(a.placement);
  prof.seed = resolve_seed(a.seed_arg);
  RngHandle rng(prof.seed);
  SparseTable t = synth_table(prof, rng);
  save_table_file(t, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private summaries of sparse tables"};
  app.require_subcommand(1);

  AnonymizeArgs an;
  CLI::App* anonymize = app.add_subcommand(
      "anonymize", "release a noisy sparse summary of a table");
  anonymize->add_option("--in", an.in, "input table CSV")->required();
  anonymize->add_option("--out", an.out, "output summary CSV")->required();
  anonymize
      ->add_option("--method", an.method,
                   "filter1|filter2|threshold|priority|filter-threshold|"
                   "filter-priority|geometric-full")
      ->required();
  anonymize->add_option("--epsilon", an.epsilon, "privacy budget")->required();
  anonymize->add_option("--sensitivity", an.sensitivity,
                        "per-record sensitivity (default 1)");
  anonymize->add_option("--theta", an.theta, "filter cutoff");
  anonymize->add_option("--tau", an.tau, "threshold-sampling scale");
  anonymize->add_option("--size", an.s, "priority sample size s");
  anonymize->add_option("--target-size", an.target_size,
                        "auto-pick theta/tau for this output size");
  anonymize->add_flag("--dyadic", an.dyadic,
                      "release dyadic range tree nodes instead of cells");
  anonymize->add_flag("--consistency", an.consistency,
                      "prune entries with missing dyadic ancestors");
  anonymize->add_option("--seed", an.seed_arg, "integer seed or 'random'");
#ifdef SPARSEDP_VERIFICATION_BUILD
  anonymize->add_option("--debug-origin", an.debug_origin_out,
                        "sidecar CSV of per-entry origins");
#endif

  QueryArgs qa;
  CLI::App* query =
      app.add_subcommand("query", "answer queries against a summary");
  query->add_option("--summary", qa.summary_path, "summary CSV")->required();
  query->add_option("--queries", qa.queries_path, "query file")->required();
  query->add_option("--table", qa.table_path,
                    "original table; adds truth and error columns");
  query->add_option("--weights", qa.weights,
                    "adjusted|unadjusted|clamped|theta-correction");
  query->add_option("--out", qa.out, "output CSV (default stdout)");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand(
      "verify", "statistical equivalence of shortcut and naive pipelines");
  verify->add_option("--m", va.m, "domain size (default 4096)");
  verify->add_option("--n", va.n, "nonzero cells (default 128)");
  verify->add_option("--epsilon", va.epsilon, "privacy budget");
  verify->add_option("--sensitivity", va.sensitivity, "sensitivity");
  verify->add_option("--method", va.method, "method to verify");
  verify->add_option("--theta", va.theta, "filter cutoff");
  verify->add_option("--tau", va.tau, "threshold scale");
  verify->add_option("--size", va.s, "priority sample size");
  verify->add_option("--trials", va.trials, "generations per pipeline");
  verify->add_option("--significance", va.significance,
                     "test level (default 0.001)");
  verify->add_option("--seed", va.seed_arg, "integer seed or 'random'");

  BenchArgs ba;
  CLI::App* bench =
      app.add_subcommand("bench", "wall-clock throughput comparison");
  bench->add_option("--m-list", ba.m_list, "domain sizes");
  bench->add_option("--rho", ba.rho, "nonzero density");
  bench->add_option("--epsilon", ba.epsilon, "privacy budget");
  bench->add_option("--methods", ba.methods, "methods to time");
  bench->add_option("--target", ba.target, "per-method output-size target");
  bench->add_option("--repeats", ba.repeats, "timing repeats (median)");
  bench->add_flag("--laborious", ba.laborious, "also time the naive pipeline");
  bench->add_option("--out", ba.out, "output CSV (default stdout)");
  bench->add_option("--seed", ba.seed_arg, "integer seed or 'random'");

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic table");
  synth->add_option("--m", sa.m, "domain size");
  synth->add_option("--rho", sa.rho, "nonzero density");
  synth->add_option("--n", sa.n, "nonzero count (overrides --rho)");
  synth->add_option("--mu", sa.mu, "mean cell count");
  synth->add_option("--sigma", sa.sigma, "count standard deviation");
  synth->add_option("--placement", sa.placement, "uniform|skewed");
  synth->add_option("--seed", sa.seed_arg, "integer seed or 'random'");
  synth->add_option("--out", sa.out, "output table CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (anonymize->parsed()) return cmd_anonymize(an);
    if (query->parsed()) return cmd_query(qa);
    if (verify->parsed()) return cmd_verify(va);
    if (bench->parsed()) return cmd_bench(ba);
    if (synth->parsed()) return cmd_synth(sa);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
