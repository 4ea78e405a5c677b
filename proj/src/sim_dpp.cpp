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


#include <algorithm>
#include <numeric>
#include <random>

#include "treegate/error.hpp"
#include "treegate/errorload.hpp"
#include "treegate/parallel.hpp"
#include "treegate/sim.hpp"

namespace treegate {

namespace {

constexpr int kDppBlocks = 44;
constexpr GateVariant kDppVariants[] = {GateVariant::unadjusted, GateVariant::local_hommel,
                                        GateVariant::local_bh, GateVariant::adaptive,
                                        GateVariant::adaptive_pruned};

std::string block_name(const std::string& college, std::size_t cohort, int block) {
  return college + "." + std::to_string(cohort + 1) + "." + std::to_string(block + 1);
}

void validate(const DppConfig& c) {
  if (c.replicates < 100) throw Error("DPP simulation needs at least 100 replicates");
  if (c.units_per_block < 4) throw Error("blocks need at least 4 units");
  if (!(c.control_sd > 0.0)) throw Error("control sd must be positive");
  if (!(c.d >= 0.0)) throw Error("effect size d must be non-negative");
  if (!(c.alpha > 0.0 && c.alpha < 0.5)) throw Error("alpha must lie in (0, 0.5)");
}

}  // namespace

DppLayout default_dpp_layout() {
  return {{"HFCC", {4, 3, 2}}, {"MCC", {3, 3, 3}}, {"OCC", {4, 3, 2}},
          {"SC", {2, 4, 3}},   {"WCC", {4, 2, 2}}};
}

HypothesisTree dpp_tree(const DppLayout& layout, std::string_view non_null_college,
                        int units_per_block) {
  std::vector<PathRow> rows;
  std::vector<std::string> non_null;
  bool found = false;
  for (const DppCollege& college : layout) {
    found = found || college.name == non_null_college;
    for (std::size_t c = 0; c < college.cohort_blocks.size(); ++c) {
      if (college.cohort_blocks[c] < 1) throw Error("cohorts need at least one block");
      for (int b = 0; b < college.cohort_blocks[c]; ++b) {
        rows.push_back({block_name(college.name, c, b),
                        {college.name, college.name + "." + std::to_string(c + 1)}, units_per_block});
        if (college.name == non_null_college) non_null.push_back(rows.back().block_id);
      }
    }
  }
  if (rows.size() != kDppBlocks)
    throw Error("DPP layout must hold 44 blocks, got " + std::to_string(rows.size()));
  if (!non_null_college.empty() && !found)
    throw Error("non-null college '" + std::string(non_null_college) + "' is not in the layout");
  return HypothesisTree::from_paths(rows).with_truth(non_null);
}

DppData generate_dpp_data(const DppConfig& config, Rng& rng) {
  validate(config);
  DppData data{dpp_tree(config.layout, config.non_null_college, config.units_per_block), {}};

  const auto n = static_cast<std::size_t>(config.units_per_block);
  const double shift = config.d * config.control_sd;
  std::normal_distribution<double> control(config.control_mean, config.control_sd);
  std::vector<std::uint8_t> assignment(n, 0);
  std::fill(assignment.begin(), assignment.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  for (NodeId leaf : data.tree.leaves()) {
    const TreeNode& node = data.tree.node(leaf);
    Block block;
    block.id = node.name;
    block.outcome.resize(n);
    for (double& y : block.outcome) y = control(rng);
    std::shuffle(assignment.begin(), assignment.end(), rng);
    block.treatment = assignment;
    if (!*node.is_null)
      for (std::size_t i = 0; i < n; ++i)
        if (block.treatment[i]) block.outcome[i] += shift;
    data.blocks.push_back(std::move(block));
  }
  return data;
}

const MethodSummary& DppSummary::at(std::string_view method) const {
  for (const MethodSummary& m : methods)
    if (m.method == method) return m;
  throw Error("method '" + std::string(method) + "' was not simulated");
}

DppSummary simulate_dpp(const DppConfig& config) {
  validate(config);
  // Structure and truth are fixed across replicates; only the data change.
  const HypothesisTree tree = dpp_tree(config.layout, config.non_null_college, config.units_per_block);
  const double d_hat = config.d_hat.value_or(config.d);
  const AlphaSchedule schedule = adaptive_schedule(tree, {.d_hat = d_hat, .alpha = config.alpha});
  constexpr std::size_t kVariants = std::size(kDppVariants);

  std::vector<std::vector<RunMetrics>> runs(config.replicates,
                                            std::vector<RunMetrics>(kVariants + 1));
  parallel_for(config.replicates, [&](std::size_t r) {
    Rng rng = make_rng(config.seed, r, 1);
    const DppData data = generate_dpp_data(config, rng);
    TestSpec spec;
    spec.statistic = config.statistic;
    spec.method = config.method;
    spec.n_perms = config.n_perms;
    spec.seed = rng();

    // Each node is tested once per replicate and shared by all variants.
    std::vector<std::optional<double>> memo(tree.size());
    auto node_p = [&](NodeId id) -> double {
      auto& slot = memo[index(id)];
      if (!slot) {
        const TreeNode& n = tree.node(id);
        const std::span<const Block> blocks(data.blocks.data() + n.leaf_begin, n.n_blocks());
        slot = permutation_pvalue(blocks, spec, index(id));
      }
      return *slot;
    };
    const PValueSource source = [&](NodeId id) -> std::optional<double> { return node_p(id); };

    for (std::size_t v = 0; v < kVariants; ++v)
      runs[r][v] = score_result(run_topdown(tree, source, kDppVariants[v], &schedule, config.alpha), tree);
    std::vector<double> leaf_p;
    for (NodeId leaf : tree.leaves()) leaf_p.push_back(node_p(leaf));
    const BottomUpResult bu = run_bottom_up(leaf_p, BottomUpMethod::bu_hommel, config.alpha);
    runs[r][kVariants] = score_bottom_up(bu.rejected, tree);
  });

  DppSummary s;
  s.config = config;
  s.sum_g = schedule.total_load;
  for (std::size_t v = 0; v <= kVariants; ++v) {
    MetricsAccumulator acc;
    for (const auto& run : runs) acc.add(run[v]);
    s.methods.push_back(
        acc.summary(v < kVariants ? std::string(to_string(kDppVariants[v])) : "bottom_up_hommel"));
  }
  return s;
}

}  // namespace treegate
