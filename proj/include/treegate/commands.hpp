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


// The command implementations behind the treegate executable.

#ifndef TREEGATE_COMMANDS_HPP_
#define TREEGATE_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "treegate/config.hpp"
#include "treegate/error.hpp"
#include "treegate/gate.hpp"
#include "treegate/io.hpp"
#include "treegate/permtest.hpp"
#include "treegate/sim.hpp"

namespace treegate {

// Bad flag combinations; the front end maps this to a usage exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

Statistic parse_statistic(std::string_view name);

struct TestOptions {
  std::string data_path;
  GateVariant variant = GateVariant::unadjusted;
  Statistic statistic = Statistic::rank;
  double alpha = 0.05;
  std::optional<double> d_hat;
  int n_perms = 1000;
  std::uint64_t seed = 0;
  std::string format = "json";  // json | dot | csv
  DotPruned dot_pruned = DotPruned::collapse;
};

void cmd_test(const TestOptions& options, std::ostream& out);

struct ScheduleOptions {
  std::string sizes_path;
  std::optional<double> d_hat;
  double alpha = 0.05;
};

void cmd_alpha_schedule(const ScheduleOptions& options, std::ostream& out);

// Scenario grids from a config file. Lists in k / levels pair up (a single
// value is broadcast); strong scenarios cross k, d and null.
std::vector<WeakConfig> weak_configs(const KeyValueConfig& config);
std::vector<StrongConfig> strong_configs(const KeyValueConfig& config);
DppConfig dpp_config(const KeyValueConfig& config);

// kind is weak, strong or dpp.
void cmd_simulate(const std::string& kind, const KeyValueConfig& config, std::ostream& out);

}  // namespace treegate

#endif  // TREEGATE_COMMANDS_HPP_
