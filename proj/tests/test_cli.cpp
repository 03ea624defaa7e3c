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
// End-to-end tests of the command-line binaries. Each case launches the
// built binary in a subprocess and inspects its exit status and output.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

namespace fs = std::filesystem;

namespace {

// Scratch space for inputs and captured output, removed at process exit.
struct ScratchDir {
  fs::path path;
  ScratchDir()
      : path(fs::temp_directory_path() /
             ("sparsedp_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const fs::path& scratch() {
  static ScratchDir dir;
  return dir.path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
  REQUIRE(out.good());
}

struct RunResult {
  int status = -1;  // -1 if the process did not exit normally
  std::string out;
  std::string err;
};

RunResult run_binary(const char* binary, const std::string& args) {
  static int counter = 0;
  fs::path out_file = scratch() / ("out_" + std::to_string(counter) + ".txt");
  fs::path err_file = scratch() / ("err_" + std::to_string(counter) + ".txt");
  ++counter;
  std::string cmd = std::string(binary) + " " + args + " > '" +
                    out_file.string() + "' 2> '" + err_file.string() + "'";
  int rc = std::system(cmd.c_str());
  RunResult r;
  if (WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

RunResult cli(const std::string& args) {
  return run_binary(SPARSEDP_CLI_PATH, args);
}

RunResult experiment(const std::string& args) {
  return run_binary(SPARSEDP_EXPERIMENT_PATH, args);
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Generates the small table shared by several cases below.
fs::path make_table(const std::string& stem) {
  fs::path table = scratch() / (stem + ".csv");
  RunResult r = cli("synth --m 4096 --n 64 --mu 50 --sigma 10 --seed 7 --out " +
                    q(table));
  REQUIRE(r.status == 0);
  return table;
}

}  // namespace

TEST_CASE("synth generates deterministic tables", "[cli]") {
  fs::path a = scratch() / "synth_a.csv";
  fs::path b = scratch() / "synth_b.csv";
  fs::path c = scratch() / "synth_c.csv";

  std::string args = "synth --m 2000 --rho 0.02 --mu 30 --sigma 5 --out ";
  REQUIRE(cli(args + q(a) + " --seed 99").status == 0);
  REQUIRE(cli(args + q(b) + " --seed 99").status == 0);
  REQUIRE(cli(args + q(c) + " --seed 100").status == 0);

  std::string body_a = slurp(a);
  REQUIRE(!body_a.empty());
  REQUIRE(contains(body_a, "# {\"cardinalities\":[2000]}"));
  REQUIRE(body_a == slurp(b));
  REQUIRE(body_a != slurp(c));

  // --n pins the nonzero count exactly, overriding --rho.
  fs::path d = scratch() / "synth_d.csv";
  REQUIRE(cli("synth --m 2000 --n 40 --rho 0.5 --seed 99 --out " + q(d))
              .status == 0);
  std::string body_d = slurp(d);
  std::size_t rows = 0;
  for (char ch : body_d)
    if (ch == '\n') ++rows;
  REQUIRE(rows == 41);  // metadata line + 40 cells
}

TEST_CASE("anonymize echoes parameters and respects the seed", "[cli]") {
  fs::path table = make_table("anon_table");
  fs::path s1 = scratch() / "anon_s1.csv";
  fs::path s2 = scratch() / "anon_s2.csv";
  fs::path s3 = scratch() / "anon_s3.csv";

  std::string base = "anonymize --in " + q(table) +
                     " --method filter2 --epsilon 0.5 --theta 3 --out ";
  REQUIRE(cli(base + q(s1) + " --seed 11").status == 0);
  REQUIRE(cli(base + q(s2) + " --seed 11").status == 0);
  REQUIRE(cli(base + q(s3) + " --seed 12").status == 0);

  std::string body = slurp(s1);
  REQUIRE(contains(body, "\"method\":\"filter2\""));
  REQUIRE(contains(body, "\"theta\":3"));
  REQUIRE(contains(body, "\"seed\":11"));
  REQUIRE(body == slurp(s2));
  REQUIRE(body != slurp(s3));

  // --target-size picks theta automatically and echoes the choice back.
  fs::path s4 = scratch() / "anon_s4.csv";
  RunResult r = cli("anonymize --in " + q(table) +
                    " --method filter2 --epsilon 0.5 --target-size 80 --out " +
                    q(s4));
  REQUIRE(r.status == 0);
  std::string auto_body = slurp(s4);
  REQUIRE(contains(auto_body, "\"theta\":"));
  REQUIRE(!contains(auto_body, "\"theta\":null"));
}

TEST_CASE("query emits answers and error reports", "[cli]") {
  fs::path table = make_table("query_table");
  fs::path summary = scratch() / "query_summary.csv";
  REQUIRE(cli("anonymize --in " + q(table) +
              " --method filter2 --epsilon 0.5 --theta 3 --seed 11 --out " +
              q(summary))
              .status == 0);

  fs::path queries = scratch() / "queries.txt";
  spit(queries,
       "# three probe queries\n"
       "P,5\n"
       "R,0,4095\n"
       "S,1 2 3\n");

  // Without --table: bare estimates, written to a file.
  fs::path answers = scratch() / "answers.csv";
  RunResult r = cli("query --summary " + q(summary) + " --queries " +
                    q(queries) + " --out " + q(answers));
  REQUIRE(r.status == 0);
  std::string body = slurp(answers);
  REQUIRE(body.rfind("query_id,estimate\nq1,", 0) == 0);
  REQUIRE(contains(body, "\nq2,"));
  REQUIRE(contains(body, "\nq3,"));

  // With --table: a truth/error report on stdout.
  r = cli("query --summary " + q(summary) + " --queries " + q(queries) +
          " --table " + q(table));
  REQUIRE(r.status == 0);
  REQUIRE(r.out.rfind("# {\"queries\":3,", 0) == 0);
  REQUIRE(contains(r.out, "query_id,truth,estimate,abs_err,rel_err\n"));
  REQUIRE(contains(r.out, "\nq2,"));

  // Alternate weight modes are accepted.
  r = cli("query --summary " + q(summary) + " --queries " + q(queries) +
          " --weights clamped");
  REQUIRE(r.status == 0);
  r = cli("query --summary " + q(summary) + " --queries " + q(queries) +
          " --weights theta-correction");
  REQUIRE(r.status == 0);
}

TEST_CASE("verify accepts a faithful shortcut", "[cli]") {
  RunResult r = cli("verify --m 1024 --method threshold --tau 4 --trials 800");
  INFO(r.out << r.err);
  REQUIRE(r.status == 0);
  REQUIRE(contains(r.out, "upgraded-zero values: KS="));
  REQUIRE(contains(r.out, "upgraded-zero counts: chi2="));
  REQUIRE(contains(r.out, "PASS"));
}

TEST_CASE("usage errors exit with status 2", "[cli]") {
  fs::path dummy_in = scratch() / "missing_table.csv";
  fs::path dummy_out = scratch() / "unwritten.csv";
  std::string io = " --in " + q(dummy_in) + " --out " + q(dummy_out);

  REQUIRE(cli("").status == 2);             // subcommand required
  REQUIRE(cli("frobnicate").status == 2);   // unknown subcommand
  REQUIRE(cli("synth --bogus 1 --out " + q(dummy_out)).status == 2);

  // Parameter validation runs before any file is touched.
  RunResult r = cli("anonymize" + io + " --method priority --epsilon 0.5");
  REQUIRE(r.status == 2);
  REQUIRE(contains(r.err, "--size"));

  REQUIRE(cli("anonymize" + io +
              " --method filter2 --epsilon 0.5 --theta 3 --consistency")
              .status == 2);
  REQUIRE(cli("anonymize" + io +
              " --method filter2 --epsilon 0.5 --theta 3 --target-size 50")
              .status == 2);
  REQUIRE(cli("anonymize" + io +
              " --method priority --epsilon 0.5 --target-size 50")
              .status == 2);
  REQUIRE(cli("synth --seed banana --out " + q(dummy_out)).status == 2);
}

TEST_CASE("data errors exit with status 1", "[cli]") {
  fs::path missing = scratch() / "no_such_table.csv";
  fs::path out = scratch() / "never_written.csv";
  RunResult r = cli("anonymize --in " + q(missing) +
                    " --method filter2 --epsilon 0.5 --theta 3 --out " +
                    q(out));
  REQUIRE(r.status == 1);
  REQUIRE(contains(r.err, "cannot open"));

  fs::path junk = scratch() / "junk_summary.csv";
  spit(junk, "hello\n");
  fs::path queries = scratch() / "data_err_queries.txt";
  spit(queries, "P,0\n");
  r = cli("query --summary " + q(junk) + " --queries " + q(queries));
  REQUIRE(r.status == 1);
  REQUIRE(contains(r.err, "error:"));

  // A nonsensical privacy budget is rejected after the table loads.
  fs::path table = make_table("data_err_table");
  r = cli("anonymize --in " + q(table) +
          " --method filter2 --epsilon 0 --theta 3 --out " + q(out));
  REQUIRE(r.status == 1);
}

TEST_CASE("bench prints a CSV of timings", "[cli]") {
  RunResult r =
      cli("bench --m-list 4096 --rho 0.01 --methods filter2 --repeats 1 "
          "--seed 3");
  REQUIRE(r.status == 0);
  REQUIRE(r.out.rfind("label,m,n,wall_ms,out_entries\n", 0) == 0);
  REQUIRE(contains(r.out, "\nfilter2,4096,"));

  r = cli("bench --m-list 1024 --methods threshold --repeats 1 --laborious");
  REQUIRE(r.status == 0);
  REQUIRE(contains(r.out, "\nlaborious-threshold,1024,"));
}

TEST_CASE("experiment runner executes config files", "[cli]") {
  fs::path accuracy_cfg = scratch() / "accuracy.cfg";
  spit(accuracy_cfg,
       "# tiny accuracy sweep\n"
       "experiment = accuracy\n"
       "m = 4096\n"
       "n = 64\n"
       "epsilon = 0.5\n"
       "methods = filter2\n"
       "theta = 3\n"
       "queries = 20\n"
       "reps = 1\n"
       "query_sizes = 64\n");
  RunResult r = experiment(q(accuracy_cfg));
  INFO(r.err);
  REQUIRE(r.status == 0);
  REQUIRE(r.out.rfind("method,target,rep,entries,query_kind,query_size,"
                      "median_rel_err,mean_abs_err\n",
                      0) == 0);
  REQUIRE(contains(r.out, "\nfilter2,0,0,"));

  fs::path equiv_cfg = scratch() / "equiv.cfg";
  spit(equiv_cfg,
       "experiment = equivalence\n"
       "m = 512\n"
       "n = 16\n"
       "method = filter2\n"
       "theta = 2\n"
       "trials = 400\n");
  r = experiment(q(equiv_cfg) + " --out -");
  INFO(r.err);
  REQUIRE(r.status == 0);
  REQUIRE(contains(r.out, "ks_stat"));
  REQUIRE(contains(r.out, "\nfilter2,400,"));

  // Config and invocation errors.
  fs::path keyless_cfg = scratch() / "keyless.cfg";
  spit(keyless_cfg, "m = 512\n");
  r = experiment(q(keyless_cfg));
  REQUIRE(r.status == 1);
  REQUIRE(contains(r.err, "experiment"));

  fs::path unknown_cfg = scratch() / "unknown.cfg";
  spit(unknown_cfg, "experiment = frobnicate\n");
  REQUIRE(experiment(q(unknown_cfg)).status == 1);

  REQUIRE(experiment(q(scratch() / "no_such.cfg")).status == 1);
  REQUIRE(experiment("").status == 2);
}
