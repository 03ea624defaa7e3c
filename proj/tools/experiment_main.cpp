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
// sparsedp-experiment: drive a reproducible experiment from a key=value
// config file and emit a CSV. See experiment.hpp for the recognized keys.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sparsedp/experiment.hpp"
#include "sparsedp/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"config-driven experiments over sparsedp summaries"};
  std::string config_path;
  std::string out_path;
  app.add_option("config", config_path, "key=value config file")->required();
  app.add_option("--out", out_path, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw sparsedp::IoError("cannot open config: " + config_path);
    sparsedp::ExperimentConfig cfg = sparsedp::ExperimentConfig::parse(in);

    std::ostringstream body;
    sparsedp::run_experiment(cfg, body);
    if (out_path.empty() || out_path == "-") {
      std::cout << body.str();
    } else {
      sparsedp::save_file(out_path, [&](std::ostream& os) { os << body.str(); });
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
