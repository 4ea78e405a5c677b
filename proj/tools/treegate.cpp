// Copyright 2026 The treegate Authors
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


// treegate: gated top-down testing for block-randomized experiments.
//
//   treegate test --data study.csv --variant adaptive --d-hat 0.2
//   treegate alpha-schedule --sizes nodes.csv --d-hat 0.2
//   treegate simulate strong --config strong.cfg --out strong.csv

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "treegate/commands.hpp"

namespace {

// Writes to --out when given, else stdout. Output is built in memory first so
// a failed run never leaves a truncated file behind.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw treegate::Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gated top-down hypothesis testing on trees of experimental blocks"};
  app.require_subcommand(1);

  std::string out_path;
  std::string variant = "unadjusted";
  std::string statistic = "rank";
  std::string dot_pruned = "collapse";
  std::optional<double> d_hat;
  treegate::TestOptions test;
  treegate::ScheduleOptions schedule;
  std::string kind;
  std::string config_path;

  auto* test_cmd = app.add_subcommand("test", "Run the gated procedure on a dataset");
  test_cmd->add_option("--data", test.data_path, "Dataset CSV (unit_id, block_id, treatment, outcome, level1..)")
      ->required()
      ->check(CLI::ExistingFile);
  test_cmd->add_option("--variant", variant,
                       "unadjusted | local_hommel | local_bh | adaptive | adaptive_hommel | adaptive_pruned")
      ->capture_default_str();
  test_cmd->add_option("--statistic", statistic, "mean_diff | rank | energy")->capture_default_str();
  test_cmd->add_option("--alpha", test.alpha, "Family-wise level")->capture_default_str();
  test_cmd->add_option("--d-hat", d_hat, "Planning effect size (Cohen's d) for adaptive variants");
  test_cmd->add_option("--n-perms", test.n_perms, "Monte Carlo permutations per node")->capture_default_str();
  test_cmd->add_option("--seed", test.seed, "Random seed")->capture_default_str();
  test_cmd->add_option("--format", test.format, "json | dot | csv")->capture_default_str();
  test_cmd->add_option("--dot-pruned", dot_pruned, "collapse | omit untested subtrees in DOT output")
      ->capture_default_str();
  test_cmd->add_option("--out", out_path, "Output file (default stdout)");

  auto* sched_cmd = app.add_subcommand("alpha-schedule", "Adaptive per-depth thresholds for a tree");
  sched_cmd->add_option("--sizes", schedule.sizes_path, "Node-size CSV (node_id, parent_id, n_units[, theta_hat])")
      ->required()
      ->check(CLI::ExistingFile);
  sched_cmd->add_option("--d-hat", d_hat, "Planning effect size (Cohen's d)");
  sched_cmd->add_option("--alpha", schedule.alpha, "Family-wise level")->capture_default_str();
  sched_cmd->add_option("--out", out_path, "Output file (default stdout)");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  sim_cmd->add_option("kind", kind, "weak | strong | dpp")->required();
  sim_cmd->add_option("--config", config_path, "key = value scenario file")->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ostringstream text;
    if (test_cmd->parsed()) {
      test.variant = treegate::parse_variant(variant);
      test.statistic = treegate::parse_statistic(statistic);
      test.d_hat = d_hat;
      if (dot_pruned == "omit")
        test.dot_pruned = treegate::DotPruned::omit;
      else if (dot_pruned != "collapse")
        throw treegate::UsageError("--dot-pruned must be collapse or omit");
      treegate::cmd_test(test, text);
    } else if (sched_cmd->parsed()) {
      schedule.d_hat = d_hat;
      treegate::cmd_alpha_schedule(schedule, text);
    } else {
      std::istringstream empty;
      const treegate::KeyValueConfig config = config_path.empty()
                                                  ? treegate::KeyValueConfig::parse(empty)
                                                  : treegate::KeyValueConfig::load(config_path);
      treegate::cmd_simulate(kind, config, text);
    }
    emit(out_path, text.str());
  } catch (const treegate::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const treegate::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
