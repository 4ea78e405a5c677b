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


#include "treegate/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "treegate/error.hpp"
#include "treegate/rng.hpp"

namespace treegate {
namespace {

TEST(BetaShape, Examples) {
  EXPECT_NEAR(calibrate_beta_shape(0.61, 0.05), 0.16500, 1e-5);
  EXPECT_NEAR(calibrate_beta_shape(0.92, 0.05), 0.02784, 1e-5);
  EXPECT_DOUBLE_EQ(calibrate_beta_shape(0.05, 0.05), 1.0);
  EXPECT_THROW(calibrate_beta_shape(1.0, 0.05), Error);
  EXPECT_THROW(calibrate_beta_shape(0.5, 0.0), Error);
}

TEST(BetaShape, DrawsHitTargetPower) {
  for (double power : {0.1, 0.5, 0.9}) {
    const double a = calibrate_beta_shape(power, 0.05);
    Rng rng = make_rng(17);
    const int n = 20000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += draw_beta_a1(a, rng) <= 0.05;
    const double se = std::sqrt(power * (1 - power) / n);
    EXPECT_NEAR(hits / static_cast<double>(n), power, 4 * se) << power;
  }
}

TEST(Weak, AlphaZeroTestsOnlyTheRoot) {
  const WeakSummary s = simulate_weak({.k = 3, .levels = 4, .alpha = 0.0, .replicates = 200, .seed = 2});
  EXPECT_EQ(s.fwer, 0.0);
  EXPECT_EQ(s.mean_tests, 1.0);
  EXPECT_EQ(s.nodes, 40u);
  EXPECT_EQ(s.leaves, 27u);
}

TEST(Weak, FwerNearAlpha) {
  for (auto [k, levels] : {std::pair{2, 6}, {4, 4}, {10, 3}}) {
    const WeakSummary s = simulate_weak({.k = k, .levels = levels, .replicates = 4000, .seed = 3});
    EXPECT_NEAR(s.fwer, 0.05, 4 * std::sqrt(0.05 * 0.95 / 4000)) << k;
    EXPECT_GE(s.mean_tests, 1.0);
  }
}

TEST(Weak, Deterministic) {
  const WeakConfig c{.k = 4, .levels = 4, .replicates = 500, .seed = 8};
  const WeakSummary a = simulate_weak(c);
  const WeakSummary b = simulate_weak(c);
  EXPECT_EQ(a.fwer, b.fwer);
  EXPECT_EQ(a.mean_tests, b.mean_tests);
}

StrongConfig SmallStrong() {
  StrongConfig c;
  c.k = 3;
  c.levels = 3;
  c.n_total = 900;
  c.d = 0.2;
  c.null_proportion = 0.67;
  c.replicates = 400;
  c.seed = 4;
  return c;
}

TEST(Strong, Deterministic) {
  const StrongSummary a = simulate_strong(SmallStrong());
  const StrongSummary b = simulate_strong(SmallStrong());
  ASSERT_EQ(a.methods.size(), strong_method_names().size());
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    EXPECT_EQ(a.methods[i].fwer, b.methods[i].fwer);
    EXPECT_EQ(a.methods[i].leaf_true_rejections, b.methods[i].leaf_true_rejections);
  }
}

TEST(Strong, RequiresEffectSize) {
  StrongConfig c = SmallStrong();
  c.d.reset();
  EXPECT_THROW(simulate_strong(c), Error);
  c.null_proportion = 1.0;
  EXPECT_NO_THROW(simulate_strong(c));
}

TEST(Strong, TreeTruthMatchesNullProportion) {
  StrongConfig c = SmallStrong();
  c.null_proportion = 2.0 / 3.0;
  const HypothesisTree tree = strong_tree(c);
  std::size_t non_null = 0;
  for (NodeId leaf : tree.leaves()) non_null += !*tree.node(leaf).is_null;
  EXPECT_EQ(non_null, 3u);
  for (const TreeNode& n : tree.nodes()) {
    if (!n.parent) continue;
    if (!*n.is_null) EXPECT_FALSE(*tree.node(*n.parent).is_null);
  }
}

TEST(Strong, LightLoadMeansPlainAlpha) {
  StrongConfig c = SmallStrong();
  c.k = 2;
  c.n_total = 40;
  c.d = 0.01;
  const StrongSummary s = simulate_strong(c);
  ASSERT_LE(s.sum_g, 1.0);
  EXPECT_EQ(s.at("TD").fwer, s.at("TD-Adp").fwer);
  EXPECT_EQ(s.at("TD").leaf_true_rejections, s.at("TD-A-Pr").leaf_true_rejections);
}

TEST(Strong, AdaptiveControlsFwer) {
  StrongConfig c = SmallStrong();
  c.replicates = 2000;
  const StrongSummary s = simulate_strong(c);
  const double slack = 4 * std::sqrt(0.05 * 0.95 / 2000.0);
  for (const char* m : {"TD-Adp", "TD-A-H", "TD-A-Pr", "BU-Hom"}) EXPECT_LE(s.at(m).fwer, 0.05 + slack) << m;
  EXPECT_THROW(s.at("nope"), Error);
}

TEST(Dpp, DataShape) {
  DppConfig c;
  Rng rng = make_rng(5);
  const DppData data = generate_dpp_data(c, rng);
  ASSERT_EQ(data.blocks.size(), 44u);
  std::size_t units = 0;
  for (const Block& b : data.blocks) {
    units += b.size();
    EXPECT_EQ(b.treated(), 25u);
  }
  EXPECT_EQ(units, 2200u);
  std::size_t non_null = 0;
  for (NodeId leaf : data.tree.leaves()) non_null += !*data.tree.node(leaf).is_null;
  EXPECT_EQ(non_null, 9u);
}

TEST(Dpp, ShiftAppliesToTreatedNonNullUnits) {
  DppConfig shifted;
  DppConfig flat;
  flat.d = 0.0;
  Rng a = make_rng(6);
  Rng b = make_rng(6);
  const DppData x = generate_dpp_data(shifted, a);
  const DppData y = generate_dpp_data(flat, b);
  for (std::size_t i = 0; i < x.blocks.size(); ++i) {
    const bool non_null = !*x.tree.node(x.tree.leaves()[i]).is_null;
    EXPECT_EQ(x.blocks[i].id.substr(0, 5) == "HFCC.", non_null);
    for (std::size_t u = 0; u < x.blocks[i].size(); ++u) {
      const double expected = non_null && x.blocks[i].treatment[u] ? 0.6 : 0.0;
      EXPECT_NEAR(x.blocks[i].outcome[u] - y.blocks[i].outcome[u], expected, 1e-12);
    }
  }
}

TEST(Dpp, LayoutErrors) {
  DppLayout layout = default_dpp_layout();
  layout[0].cohort_blocks = {1, 1, 1};
  EXPECT_THROW(dpp_tree(layout, "HFCC"), Error);
  EXPECT_THROW(dpp_tree(default_dpp_layout(), "NOPE"), Error);
}

TEST(Dpp, SmallRunIsDeterministic) {
  DppConfig c;
  c.replicates = 100;
  c.n_perms = 100;
  const DppSummary a = simulate_dpp(c);
  const DppSummary b = simulate_dpp(c);
  ASSERT_EQ(a.methods.size(), 6u);
  for (std::size_t i = 0; i < a.methods.size(); ++i) {
    EXPECT_EQ(a.methods[i].leaf_true_rejections, b.methods[i].leaf_true_rejections);
    EXPECT_EQ(a.methods[i].leaf_fwer, b.methods[i].leaf_fwer);
  }
  EXPECT_NO_THROW(a.at("bottom_up_hommel"));
}

}  // namespace
}  // namespace treegate
