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


// Monte Carlo studies of the gated procedure. The multi-college study runs
// real permutation tests; the other two draw node p-values directly.

#ifndef TREEGATE_SIM_HPP_
#define TREEGATE_SIM_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treegate/gate.hpp"
#include "treegate/permtest.hpp"
#include "treegate/rng.hpp"
#include "treegate/tree.hpp"

namespace treegate {

// Means of RunMetrics over replicates. Standard errors are reported for the
// two indicator rates.
struct MethodSummary {
  std::string method;
  std::size_t replicates = 0;
  double fwer = 0.0;
  double fwer_se = 0.0;
  double leaf_fwer = 0.0;
  double leaf_fwer_se = 0.0;
  double false_rejection_prop = 0.0;
  double leaf_false_rejection_prop = 0.0;
  double power = 0.0;
  double leaf_power = 0.0;
  double true_rejections = 0.0;
  double leaf_true_rejections = 0.0;
  double nodes_tested = 0.0;
  double leaves_tested = 0.0;
};

// Sums metrics in the order given; fed replicate by replicate.
class MetricsAccumulator {
 public:
  void add(const RunMetrics& m);
  MethodSummary summary(std::string method) const;

 private:
  std::size_t n_ = 0;
  double fwer_ = 0, leaf_fwer_ = 0, frp_ = 0, leaf_frp_ = 0, power_ = 0, leaf_power_ = 0;
  double true_ = 0, leaf_true_ = 0, nodes_ = 0, leaves_ = 0;
};

// sqrt(p (1 - p) / n).
double binomial_se(double p, std::size_t n);

// ---- weak control ----

struct WeakConfig {
  int k = 2;
  int levels = 6;
  double alpha = 0.05;
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
};

struct WeakSummary {
  int k = 0;
  int levels = 0;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::size_t replicates = 0;
  double fwer = 0.0;
  double fwer_se = 0.0;
  double mean_tests = 0.0;
};

WeakSummary simulate_weak(const WeakConfig& config);

// ---- strong control ----

// Shape a of Beta(a, 1) such that P(p <= alpha) = alpha^a = target_power.
double calibrate_beta_shape(double target_power, double alpha);
// One Beta(a, 1) draw: U^(1/a).
double draw_beta_a1(double a, Rng& rng);

enum class Placement { scattered, contiguous };

struct StrongConfig {
  int k = 4;
  int levels = 4;  // root is level 1
  std::int64_t n_total = 2048;
  std::optional<double> d;  // required unless null_proportion == 1
  double null_proportion = 0.8;
  double alpha = 0.05;
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  Placement placement = Placement::scattered;
  // Scale each non-null node's effect by its share of non-null leaves.
  bool attenuate = false;
  // Planning effect for the adaptive schedule; defaults to d, or 0.10 when
  // every hypothesis is null.
  std::optional<double> d_hat;
  std::vector<std::string> methods;  // empty = all
};

// Method names as used in the output tables.
const std::vector<std::string>& strong_method_names();

struct StrongSummary {
  StrongConfig config;
  double sum_g = 0.0;  // total error load of the adaptive schedule
  std::size_t non_null_leaves = 0;
  std::vector<MethodSummary> methods;

  const MethodSummary& at(std::string_view method) const;
};

// Truth-labeled regular tree for a scenario.
HypothesisTree strong_tree(const StrongConfig& config);
StrongSummary simulate_strong(const StrongConfig& config);

// ---- block-randomized study ----

struct DppCollege {
  std::string name;
  std::vector<int> cohort_blocks;  // blocks per cohort
};

using DppLayout = std::vector<DppCollege>;

// Five colleges, three cohorts each, 44 blocks; HFCC holds 9 blocks.
DppLayout default_dpp_layout();

struct DppConfig {
  DppLayout layout = default_dpp_layout();
  double d = 0.2;
  std::optional<double> d_hat;  // defaults to d
  std::string non_null_college = "HFCC";
  int units_per_block = 50;
  double control_mean = 10.0;
  double control_sd = 3.0;
  double alpha = 0.05;
  std::size_t replicates = 500;
  std::uint64_t seed = 1;
  Statistic statistic = Statistic::rank;
  NullMethod method = NullMethod::monte_carlo;
  int n_perms = 500;
};

struct DppData {
  HypothesisTree tree;       // truth-labeled
  std::vector<Block> blocks;  // aligned with tree.leaves()
};

// Tree for a layout: root / college / cohort / block.
HypothesisTree dpp_tree(const DppLayout& layout, std::string_view non_null_college,
                        int units_per_block = 50);
DppData generate_dpp_data(const DppConfig& config, Rng& rng);

// Table rows: the five top-down variants, then "bottom_up_hommel".
struct DppSummary {
  DppConfig config;
  double sum_g = 0.0;
  std::vector<MethodSummary> methods;

  const MethodSummary& at(std::string_view method) const;
};

DppSummary simulate_dpp(const DppConfig& config);

}  // namespace treegate

#endif  // TREEGATE_SIM_HPP_
