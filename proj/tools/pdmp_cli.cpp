// Copyright 2026 The pdmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the solver only through the C interface.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdmp/pdmp.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::int64_t> seed;
  bool quiet = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON experiment configuration");
  sub->add_option("--out", o.out, "output directory (default: the config's output.dir)");
  sub->add_option("--seed", o.seed, "first seed of the seed range");
  sub->add_flag("--quiet", o.quiet, "suppress the run summary");
  sub->add_option("--set", o.sets, "override a config value: dotted.key=value (repeatable)");
}

int execute(const char* kind, const Options& o) {
  std::string text;
  std::string base_dir = std::filesystem::current_path().string();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) {
      std::cerr << "error: cannot open config file: " << o.config << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    base_dir = std::filesystem::absolute(o.config).parent_path().string();
  }

  std::vector<std::string> sets = o.sets;
  if (o.seed) sets.push_back("graph.seeds.first=" + std::to_string(*o.seed));
  std::vector<const char*> argv;
  for (const auto& s : sets) argv.push_back(s.c_str());

  int exit_status = 1;
  char* report = nullptr;
  const pdmp_status st = pdmp_experiment_run(text.c_str(), base_dir.c_str(), kind, argv.data(), argv.size(),
                                             o.out.empty() ? nullptr : o.out.c_str(), &exit_status, &report);
  if (st != PDMP_OK) {
    std::cerr << "error (" << pdmp_status_string(st) << "): " << pdmp_last_error_message() << "\n";
    return st == PDMP_ERR_CONFIG ? 2 : 1;
  }
  if (!o.quiet && report) std::cout << report;
  pdmp_string_free(report);
  return exit_status == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed primal-dual consensus solver with multiple primal steps per iteration"};
  app.set_version_flag("--version", pdmp_version());
  app.require_subcommand(1, 1);

  Options opts;
  struct Command {
    const char* name;
    const char* kind;
    const char* help;
  };
  const Command commands[] = {
      {"run", "single_run", "run a single trajectory"},
      {"sweep", "quadratic_sweep", "multi-seed sweep on random quadratic instances"},
      {"compare", "logistic_compare", "compare PD, EXTRA, DIGing and NEAR-DGD+ on logistic regression"},
      {"certify", "certify", "certify the rate and check every monitor along a trajectory"},
  };
  std::vector<std::pair<CLI::App*, const char*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, opts);
    subs.emplace_back(sub, c.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const auto& [sub, kind] : subs) {
    if (sub->parsed()) return execute(kind, opts);
  }
  return 2;
}
