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


#include "treegate/permtest.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "treegate/error.hpp"

namespace treegate {
namespace {

Block MakeBlock(std::string id, std::vector<double> y, std::vector<std::uint8_t> z) {
  return Block{std::move(id), std::move(z), std::move(y)};
}

std::vector<Block> RandomBlocks(std::mt19937_64& rng, std::vector<std::size_t> sizes, double shift = 0.0) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Block> blocks;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    Block block;
    block.id = "b" + std::to_string(b);
    block.treatment.assign(sizes[b], 0);
    std::fill(block.treatment.begin(), block.treatment.begin() + static_cast<long>(sizes[b] / 2), 1);
    std::shuffle(block.treatment.begin(), block.treatment.end(), rng);
    for (std::size_t i = 0; i < sizes[b]; ++i)
      block.outcome.push_back(noise(rng) + (block.treatment[i] ? shift : 0.0));
    blocks.push_back(std::move(block));
  }
  return blocks;
}

TEST(EnergyScores, ThreePoints) {
  const std::vector<double> y = {1, 2, 3};
  const EnergyScores s = energy_scores(y);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s(0, 2), 1.5);
  EXPECT_DOUBLE_EQ(s(0, 3), 1.5);
  EXPECT_DOUBLE_EQ(s(0, 4), 2.0);
  EXPECT_NEAR(s(0, 5), 0.76159, 5e-6);
}

TEST(EnergyScores, ConstantOutcomes) {
  const std::vector<double> y = {5, 5, 5};
  const EnergyScores s = energy_scores(y);
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(s(i, 1), 2.0);
    EXPECT_DOUBLE_EQ(s(i, 2), 0.0);
    EXPECT_DOUBLE_EQ(s(i, 3), 0.0);
    EXPECT_DOUBLE_EQ(s(i, 4), 0.0);
  }
}

TEST(EnergyScores, TwoPoints) {
  const std::vector<double> y = {0, 10};
  const EnergyScores s = energy_scores(y);
  EXPECT_DOUBLE_EQ(s(0, 2), 10.0);
  EXPECT_DOUBLE_EQ(s(1, 2), 10.0);
  EXPECT_DOUBLE_EQ(s(0, 4), 10.0);
  EXPECT_DOUBLE_EQ(s(1, 4), 10.0);
}

TEST(EnergyScores, TooFewUnits) {
  const std::vector<double> y = {1};
  EXPECT_THROW(energy_scores(y), Error);
}

TEST(EnergyScores, MatchPairwiseDefinition) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coarse(0, 6);  // forces ties
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(2 + trial % 9);
    for (double& v : y) v = trial % 2 ? coarse(rng) : std::normal_distribution<double>()(rng);
    const EnergyScores s = energy_scores(y);
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
      double below = 0, equal = 0;
      for (std::size_t j = 0; j < n; ++j) {
        below += y[j] < y[i];
        equal += y[j] == y[i];
      }
      const double rank = below + (equal + 1) / 2.0;
      EXPECT_NEAR(s(i, 1), rank, 1e-12);
      double dist = 0, max_dist = 0, rank_dist = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        dist += std::abs(y[i] - y[j]);
        max_dist = std::max(max_dist, std::abs(y[i] - y[j]));
        rank_dist += std::abs(s(i, 1) - s(j, 1));
      }
      EXPECT_NEAR(s(i, 2), dist / (n - 1), 1e-12);
      EXPECT_NEAR(s(i, 3), rank_dist / (n - 1), 1e-12);
      EXPECT_NEAR(s(i, 4), max_dist, 1e-12);
      EXPECT_NEAR(s(i, 5), std::tanh(y[i]), 1e-15);
    }
  }
}

TEST(EnergyScores, RankColumnsInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(8);
  std::vector<double> y(9), t(9);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = std::normal_distribution<double>()(rng);
    t[i] = std::exp(3.0 * y[i]);
  }
  const EnergyScores a = energy_scores(y);
  const EnergyScores b = energy_scores(t);
  EXPECT_TRUE(a.col(1).isApprox(b.col(1)));
  EXPECT_TRUE(a.col(3).isApprox(b.col(3)));
}

TEST(BlockStatistic, MeanDifference) {
  const std::vector<Block> data = {MakeBlock("b", {1, 2, 3, 4}, {0, 0, 1, 1})};
  const std::vector<std::vector<std::uint8_t>> z = {{0, 0, 1, 1}};
  EXPECT_DOUBLE_EQ(block_statistic(data, Statistic::mean_diff, z)(0), 2.0);
  const std::vector<std::vector<std::uint8_t>> swapped = {{1, 1, 0, 0}};
  EXPECT_DOUBLE_EQ(block_statistic(data, Statistic::mean_diff, swapped)(0), -2.0);
}

TEST(BlockStatistic, SizeWeightedAcrossBlocks) {
  const std::vector<Block> data = {MakeBlock("a", {1, 2, 3, 4}, {0, 0, 1, 1}),
                                   MakeBlock("b", {0, 0, 6, 0, 0, 0}, {0, 0, 1, 1, 0, 0})};
  const std::vector<std::vector<std::uint8_t>> z = {data[0].treatment, data[1].treatment};
  // Block a: 2.0 with weight 4/10; block b: 3 - 0 = 3.0 with weight 6/10.
  EXPECT_NEAR(block_statistic(data, Statistic::mean_diff, z)(0), 0.4 * 2.0 + 0.6 * 3.0, 1e-15);
}

TEST(BlockStatistic, ConstantOutcomesGiveZero) {
  const std::vector<Block> data = {MakeBlock("b", {7, 7, 7, 7, 7}, {1, 0, 1, 0, 0})};
  for (const auto& z : testing::all_assignments(5, 2)) {
    const std::vector<std::vector<std::uint8_t>> a = {z};
    EXPECT_DOUBLE_EQ(block_statistic(data, Statistic::mean_diff, a)(0), 0.0);
    EXPECT_DOUBLE_EQ(block_statistic(data, Statistic::rank, a)(0), 0.0);
    EXPECT_NEAR(block_statistic(data, Statistic::energy, a).norm(), 0.0, 1e-15);
  }
}

TEST(PermutationPValue, ExactStrictMaximum) {
  const std::vector<Block> data = {MakeBlock("b", {1, 2, 3, 4}, {0, 0, 1, 1})};
  TestSpec spec;
  spec.statistic = Statistic::mean_diff;
  spec.sides = Sides::one;
  spec.method = NullMethod::exact;
  const PermutationResult r = permutation_test(data, spec);
  EXPECT_DOUBLE_EQ(r.n_reference, 6.0);
  EXPECT_NEAR(r.p_value, 1.0 / 6.0, 1e-15);
  // Automatic mode picks enumeration for tiny designs.
  spec.method = NullMethod::automatic;
  EXPECT_EQ(permutation_test(data, spec).method, NullMethod::exact);
}

TEST(PermutationPValue, ConstantOutcomesGiveOne) {
  const std::vector<Block> data = {MakeBlock("a", {2, 2, 2, 2}, {1, 0, 1, 0}),
                                   MakeBlock("b", {2, 2, 2, 2, 2, 2}, {0, 1, 1, 0, 1, 0})};
  for (Statistic s : {Statistic::mean_diff, Statistic::rank, Statistic::energy}) {
    for (NullMethod m : {NullMethod::exact, NullMethod::monte_carlo, NullMethod::asymptotic}) {
      TestSpec spec;
      spec.statistic = s;
      spec.method = m;
      spec.n_perms = 200;
      EXPECT_DOUBLE_EQ(permutation_pvalue(data, spec), 1.0);
    }
  }
}

// Exact p-value recomputed by looping over every joint assignment.
double BruteForceExact(const std::vector<Block>& data, Statistic stat, Sides sides) {
  std::vector<std::vector<std::vector<std::uint8_t>>> per_block;
  for (const Block& b : data) per_block.push_back(testing::all_assignments(b.size(), b.treated()));
  std::vector<Eigen::VectorXd> stats;
  std::vector<std::size_t> idx(data.size(), 0);
  while (true) {
    std::vector<std::vector<std::uint8_t>> z;
    for (std::size_t b = 0; b < data.size(); ++b) z.push_back(per_block[b][idx[b]]);
    stats.push_back(block_statistic(data, stat, z));
    std::size_t b = 0;
    while (b < idx.size() && ++idx[b] == per_block[b].size()) idx[b++] = 0;
    if (b == idx.size()) break;
  }
  std::vector<std::vector<std::uint8_t>> observed;
  for (const Block& b : data) observed.push_back(b.treatment);
  const Eigen::VectorXd obs = block_statistic(data, stat, observed);

  std::vector<double> ref;
  double t_obs = 0;
  if (stat == Statistic::energy) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(6, 6);
    for (const auto& s : stats) sigma += s * s.transpose();
    sigma /= static_cast<double>(stats.size());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(6);
    for (int i = 0; i < 6; ++i)
      if (sv(i) > 1e-10 * sv(0)) inv(i) = 1.0 / sv(i);
    const Eigen::MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    for (const auto& s : stats) ref.push_back(s.dot(pinv * s));
    t_obs = obs.dot(pinv * obs);
  } else {
    for (const auto& s : stats) ref.push_back(sides == Sides::one ? s(0) : std::abs(s(0)));
    t_obs = sides == Sides::one ? obs(0) : std::abs(obs(0));
  }
  double hits = 0;
  for (double t : ref) hits += t >= t_obs - 1e-9 * std::max(1.0, std::abs(t_obs));
  return hits / static_cast<double>(ref.size());
}

TEST(PermutationPValue, ExactMatchesBruteForce) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const std::vector<Block> data = RandomBlocks(rng, {4, 5, 6}, trial % 3 == 0 ? 0.0 : 1.0);
    for (Statistic s : {Statistic::mean_diff, Statistic::rank, Statistic::energy}) {
      for (Sides sides : {Sides::one, Sides::two}) {
        TestSpec spec;
        spec.statistic = s;
        spec.sides = sides;
        spec.method = NullMethod::exact;
        const PermutationResult r = permutation_test(data, spec);
        EXPECT_DOUBLE_EQ(r.n_reference, 6.0 * 10.0 * 20.0);
        EXPECT_NEAR(r.p_value, BruteForceExact(data, s, sides), 1e-12);
      }
    }
  }
}

TEST(PermutationPValue, ExactValuesLieOnGrid) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Block> data = RandomBlocks(rng, {8, 7}, 0.5);
    for (Statistic s : {Statistic::mean_diff, Statistic::rank, Statistic::energy}) {
      TestSpec spec;
      spec.statistic = s;
      spec.method = NullMethod::exact;
      const PermutationResult r = permutation_test(data, spec);
      const double j = r.p_value * r.n_reference;
      EXPECT_NEAR(j, std::round(j), 1e-9);
      EXPECT_GE(std::round(j), 1.0);
    }
  }
}

TEST(PermutationPValue, RankInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(21);
  std::vector<Block> data = RandomBlocks(rng, {6, 8}, 0.8);
  TestSpec spec;
  spec.statistic = Statistic::rank;
  spec.method = NullMethod::exact;
  const double before = permutation_pvalue(data, spec);
  for (Block& b : data)
    for (double& y : b.outcome) y = std::exp(y) + y * y * y;
  EXPECT_DOUBLE_EQ(permutation_pvalue(data, spec), before);
}

TEST(PermutationPValue, MonteCarloIsDeterministicAndOnAddOneGrid) {
  std::mt19937_64 rng(6);
  const std::vector<Block> data = RandomBlocks(rng, {20, 30}, 0.3);
  for (Statistic s : {Statistic::mean_diff, Statistic::rank, Statistic::energy}) {
    TestSpec spec;
    spec.statistic = s;
    spec.method = NullMethod::monte_carlo;
    spec.n_perms = 499;
    spec.seed = 42;
    const double a = permutation_pvalue(data, spec, 7);
    EXPECT_EQ(a, permutation_pvalue(data, spec, 7));
    const double j = a * 500.0;
    EXPECT_NEAR(j, std::round(j), 1e-9);
    EXPECT_GE(a, 1.0 / 500.0);
  }
}

TEST(PermutationPValue, AsymptoticTracksExact) {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    // Rank sums live on a lattice, so small blocks put visible mass on the
    // observed value that the normal curve does not see.
    const std::vector<Block> data = RandomBlocks(rng, {30, 30, 24}, 0.3);
    for (Statistic s : {Statistic::mean_diff, Statistic::rank}) {
      TestSpec spec;
      spec.statistic = s;
      spec.method = NullMethod::asymptotic;
      const double approx = permutation_pvalue(data, spec);
      spec.method = NullMethod::monte_carlo;
      spec.n_perms = 4000;
      EXPECT_NEAR(approx, permutation_pvalue(data, spec), 0.04);
    }
  }
}

TEST(PermutationPValue, EnergyDetectsSpreadChange) {
  // Same centre, treated units far more spread out: means cancel, the
  // distance scores do not.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Block> data;
  for (int b = 0; b < 4; ++b) {
    Block block;
    block.id = "b" + std::to_string(b);
    for (int i = 0; i < 40; ++i) {
      const std::uint8_t z = i % 2;
      block.treatment.push_back(z);
      block.outcome.push_back(noise(rng) * (z ? 4.0 : 1.0));
    }
    data.push_back(block);
  }
  TestSpec spec;
  spec.method = NullMethod::monte_carlo;
  spec.n_perms = 999;
  spec.statistic = Statistic::energy;
  EXPECT_LT(permutation_pvalue(data, spec), 0.01);
}

TEST(PermutationPValue, SubUniformUnderShamTreatment) {
  std::mt19937_64 rng(77);
  const int reps = 300;
  for (Statistic s : {Statistic::mean_diff, Statistic::rank, Statistic::energy}) {
    int hits = 0;
    for (int r = 0; r < reps; ++r) {
      const std::vector<Block> data = RandomBlocks(rng, {10, 14});
      TestSpec spec;
      spec.statistic = s;
      spec.method = NullMethod::monte_carlo;
      spec.n_perms = 199;
      spec.seed = static_cast<std::uint64_t>(r);
      hits += permutation_pvalue(data, spec) <= 0.1;
    }
    const double rate = hits / static_cast<double>(reps);
    EXPECT_LE(rate, 0.1 + 3 * std::sqrt(0.1 * 0.9 / reps));
  }
}

TEST(PermutationPValue, Errors) {
  const std::vector<Block> degenerate = {MakeBlock("ok", {1, 2}, {1, 0}),
                                         MakeBlock("all-treated", {1, 2}, {1, 1})};
  try {
    permutation_pvalue(degenerate, TestSpec{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("all-treated"), std::string::npos);
  }
  const std::vector<Block> data = {MakeBlock("b", {1, 2, 3, 4}, {0, 0, 1, 1})};
  TestSpec spec;
  spec.method = NullMethod::monte_carlo;
  spec.n_perms = 0;
  EXPECT_THROW(permutation_pvalue(data, spec), Error);
  spec.method = NullMethod::exact;
  spec.exact_cap = 5;
  EXPECT_THROW(permutation_pvalue(data, spec), Error);
  const std::vector<Block> ragged = {MakeBlock("r", {1, 2, 3}, {0, 1})};
  EXPECT_THROW(permutation_pvalue(ragged, TestSpec{}), Error);
}

TEST(AssignmentCount, ProductOfBinomials) {
  const std::vector<Block> data = {MakeBlock("a", {1, 2, 3, 4}, {1, 1, 0, 0}),
                                   MakeBlock("b", {1, 2, 3, 4, 5, 6}, {1, 0, 1, 0, 1, 0})};
  EXPECT_DOUBLE_EQ(assignment_count(data), 6.0 * 20.0);
}

}  // namespace
}  // namespace treegate
