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


#include "treegate/commands.hpp"

#include <array>
#include <fstream>

#include "treegate/errorload.hpp"
#include "treegate/error.hpp"

namespace treegate {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

int to_int(long long v, const char* key) {
  if (v < 0 || v > 1'000'000'000) throw Error(std::string("value of '") + key + "' is out of range");
  return static_cast<int>(v);
}

constexpr std::array<std::string_view, 5> kWeakKeys = {"k", "levels", "alpha", "replicates", "seed"};
constexpr std::array<std::string_view, 12> kStrongKeys = {
    "k",     "levels",     "n_total", "d",         "null",     "alpha",
    "replicates", "seed",  "placement", "attenuate", "d_hat", "methods"};
constexpr std::array<std::string_view, 13> kDppKeys = {
    "d",         "d_hat",  "replicates", "seed",           "n_perms",
    "statistic", "method", "alpha",      "units_per_block", "control_mean",
    "control_sd", "non_null_college", "layout"};

NullMethod parse_method(const std::string& name) {
  if (name == "automatic") return NullMethod::automatic;
  if (name == "monte_carlo") return NullMethod::monte_carlo;
  if (name == "exact") return NullMethod::exact;
  if (name == "asymptotic") return NullMethod::asymptotic;
  throw Error("unknown null method '" + name + "' (expected automatic, monte_carlo, exact or asymptotic)");
}

// "HFCC:4/3/2; MCC:3/3/3; ..."
DppLayout parse_layout(const std::string& text) {
  DppLayout layout;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    start = end + 1;
    if (item.empty()) continue;
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) throw Error("layout entry '" + item + "' needs college:blocks/blocks/...");
    DppCollege college{item.substr(0, colon), {}};
    std::size_t pos = colon + 1;
    while (pos <= item.size()) {
      const std::size_t slash = std::min(item.find('/', pos), item.size());
      try {
        college.cohort_blocks.push_back(std::stoi(item.substr(pos, slash - pos)));
      } catch (const std::exception&) {
        throw Error("layout entry '" + item + "' has a bad block count");
      }
      pos = slash + 1;
    }
    layout.push_back(std::move(college));
  }
  return layout;
}

}  // namespace

Statistic parse_statistic(std::string_view name) {
  if (name == "mean_diff") return Statistic::mean_diff;
  if (name == "rank") return Statistic::rank;
  if (name == "energy") return Statistic::energy;
  throw Error("unknown statistic '" + std::string(name) + "' (expected mean_diff, rank or energy)");
}

void cmd_test(const TestOptions& options, std::ostream& out) {
  if (uses_schedule(options.variant) && !options.d_hat)
    throw UsageError("variant '" + std::string(to_string(options.variant)) + "' requires --d-hat");
  if (options.format != "json" && options.format != "dot" && options.format != "csv")
    throw UsageError("unknown format '" + options.format + "' (expected json, dot or csv)");
  std::ifstream in = open_input(options.data_path);
  const Dataset data = read_dataset(in, options.data_path);
  const HypothesisTree tree = dataset_tree(data);
  const std::vector<Block> blocks = blocks_in_leaf_order(data, tree);

  std::optional<AlphaSchedule> schedule;
  if (uses_schedule(options.variant))
    schedule = adaptive_schedule(tree, {.d_hat = *options.d_hat, .alpha = options.alpha});

  TestSpec spec;
  spec.statistic = options.statistic;
  spec.n_perms = options.n_perms;
  spec.seed = options.seed;
  const PValueSource source = [&](NodeId id) -> std::optional<double> {
    const TreeNode& n = tree.node(id);
    return permutation_pvalue(std::span(blocks).subspan(n.leaf_begin, n.n_blocks()), spec, index(id));
  };
  const ResultTree result =
      run_topdown(tree, source, options.variant, schedule ? &*schedule : nullptr, options.alpha);
  if (options.format == "json")
    write_result_json(out, result, tree);
  else if (options.format == "dot")
    write_result_dot(out, result, tree, options.dot_pruned);
  else
    write_result_csv(out, result, tree);
}

void cmd_alpha_schedule(const ScheduleOptions& options, std::ostream& out) {
  std::ifstream in = open_input(options.sizes_path);
  const SizedTree sized = read_node_sizes(in, options.sizes_path);
  const bool all_overridden =
      std::all_of(sized.theta_override.begin(), sized.theta_override.end(),
                  [](const std::optional<double>& t) { return t.has_value(); });
  if (!options.d_hat && !all_overridden)
    throw UsageError("--d-hat is required unless every node has a theta_hat");
  const AlphaSchedule schedule = adaptive_schedule(
      sized.tree, {.d_hat = options.d_hat.value_or(0.0), .alpha = options.alpha}, sized.theta_override);
  write_schedule_csv(out, schedule);
}

std::vector<WeakConfig> weak_configs(const KeyValueConfig& config) {
  config.check_keys(kWeakKeys);
  const auto ks = config.get_ints("k", {2});
  const auto levels = config.get_ints("levels", {6});
  if (levels.size() != 1 && levels.size() != ks.size())
    throw Error("'levels' must hold one value or one per entry of 'k'");
  std::vector<WeakConfig> out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    WeakConfig c;
    c.k = to_int(ks[i], "k");
    c.levels = to_int(levels.size() == 1 ? levels[0] : levels[i], "levels");
    c.alpha = config.get_double("alpha", c.alpha);
    c.replicates = static_cast<std::size_t>(config.get_int("replicates", 2000));
    c.seed = static_cast<std::uint64_t>(config.get_int("seed", 1));
    out.push_back(c);
  }
  return out;
}

std::vector<StrongConfig> strong_configs(const KeyValueConfig& config) {
  config.check_keys(kStrongKeys);
  StrongConfig base;
  base.levels = to_int(config.get_int("levels", base.levels), "levels");
  base.n_total = config.get_int("n_total", base.n_total);
  base.alpha = config.get_double("alpha", base.alpha);
  base.replicates = static_cast<std::size_t>(config.get_int("replicates", 2000));
  base.seed = static_cast<std::uint64_t>(config.get_int("seed", 1));
  const std::string placement = config.get_string("placement", "scattered");
  if (placement == "scattered")
    base.placement = Placement::scattered;
  else if (placement == "contiguous")
    base.placement = Placement::contiguous;
  else
    throw Error("placement must be scattered or contiguous, got '" + placement + "'");
  base.attenuate = config.get_bool("attenuate", false);
  if (config.has("d_hat")) base.d_hat = config.get_double("d_hat", 0.0);
  base.methods = config.get_strings("methods", {});

  const auto ks = config.get_ints("k", {4});
  const auto ds = config.get_doubles("d", {});
  const auto nulls = config.get_doubles("null", {0.8});
  std::vector<StrongConfig> out;
  for (long long k : ks) {
    for (double null : nulls) {
      StrongConfig c = base;
      c.k = to_int(k, "k");
      c.null_proportion = null;
      if (null >= 1.0) {
        out.push_back(c);  // d plays no role when everything is null
        continue;
      }
      if (ds.empty()) throw Error("key 'd' is required for scenarios with non-null hypotheses");
      for (double d : ds) {
        c.d = d;
        out.push_back(c);
      }
    }
  }
  return out;
}

DppConfig dpp_config(const KeyValueConfig& config) {
  config.check_keys(kDppKeys);
  DppConfig c;
  c.d = config.get_double("d", c.d);
  if (config.has("d_hat")) c.d_hat = config.get_double("d_hat", 0.0);
  c.replicates = static_cast<std::size_t>(config.get_int("replicates", 500));
  c.seed = static_cast<std::uint64_t>(config.get_int("seed", 1));
  c.n_perms = to_int(config.get_int("n_perms", c.n_perms), "n_perms");
  c.statistic = parse_statistic(config.get_string("statistic", "rank"));
  c.method = parse_method(config.get_string("method", "monte_carlo"));
  c.alpha = config.get_double("alpha", c.alpha);
  c.units_per_block = to_int(config.get_int("units_per_block", c.units_per_block), "units_per_block");
  c.control_mean = config.get_double("control_mean", c.control_mean);
  c.control_sd = config.get_double("control_sd", c.control_sd);
  c.non_null_college = config.get_string("non_null_college", c.non_null_college);
  if (config.has("layout")) c.layout = parse_layout(config.get_string("layout", ""));
  return c;
}

void cmd_simulate(const std::string& kind, const KeyValueConfig& config, std::ostream& out) {
  if (kind == "weak") {
    std::vector<WeakSummary> rows;
    for (const WeakConfig& c : weak_configs(config)) rows.push_back(simulate_weak(c));
    write_weak_csv(out, rows);
  } else if (kind == "strong") {
    std::vector<StrongSummary> rows;
    for (const StrongConfig& c : strong_configs(config)) rows.push_back(simulate_strong(c));
    write_strong_csv(out, rows);
  } else if (kind == "dpp") {
    write_dpp_csv(out, simulate_dpp(dpp_config(config)));
  } else {
    throw UsageError("unknown simulation kind '" + kind + "' (expected weak, strong or dpp)");
  }
}

}  // namespace treegate
