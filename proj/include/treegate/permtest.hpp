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

// Randomization tests for block-randomized data. Treatment is re-assigned
// within each block keeping the number treated fixed, so the reference
// distribution is exact under the sharp null of no effect.

#ifndef TREEGATE_PERMTEST_HPP_
#define TREEGATE_PERMTEST_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace treegate {

struct Block {
  std::string id;
  std::vector<std::uint8_t> treatment;  // 1 = intervention
  std::vector<double> outcome;

  std::size_t size() const { return outcome.size(); }
  std::size_t treated() const;
};

enum class Statistic { mean_diff, rank, energy };
enum class Sides { one, two };

// automatic: exact enumeration when the assignment count is at most
// exact_cap, Monte Carlo otherwise. asymptotic: normal / chi-square
// approximation using the closed-form permutation covariance.
enum class NullMethod { automatic, monte_carlo, exact, asymptotic };

struct TestSpec {
  Statistic statistic = Statistic::rank;
  Sides sides = Sides::two;
  NullMethod method = NullMethod::automatic;
  int n_perms = 1000;
  std::uint64_t seed = 0;
  double exact_cap = 10000;
};

// Per-unit score columns: outcome, mid-rank, mean |y_i - y_j| over j != i,
// mean rank distance over j != i, max |y_i - y_j|, tanh(y_i).
using EnergyScores = Eigen::Matrix<double, Eigen::Dynamic, 6>;
EnergyScores energy_scores(std::span<const double> outcomes);

// Mid-ranks (average rank for ties), 1-based.
Eigen::VectorXd midranks(std::span<const double> values);

// Statistic vector for one treatment assignment per block: the block-size
// weighted average of within-block (treated mean - control mean) of the
// statistic's scores. Length 1 for mean_diff and rank, 6 for energy.
Eigen::VectorXd block_statistic(std::span<const Block> data, Statistic statistic,
                                std::span<const std::vector<std::uint8_t>> assignment);

struct PermutationResult {
  double p_value = 1.0;
  // Observed scalar statistic: T, |T|, or the energy quadratic form.
  double statistic = 0.0;
  // Reference draws (Monte Carlo) or enumerated assignments (exact).
  double n_reference = 0;
  NullMethod method = NullMethod::monte_carlo;
  // Degrees of freedom of the chi-square approximation (asymptotic only).
  int df = 0;
};

// `stream` selects an independent RNG stream under spec.seed, e.g. the node id.
PermutationResult permutation_test(std::span<const Block> data, const TestSpec& spec,
                                   std::uint64_t stream = 0);

inline double permutation_pvalue(std::span<const Block> data, const TestSpec& spec,
                                 std::uint64_t stream = 0) {
  return permutation_test(data, spec, stream).p_value;
}

// Number of within-block assignments, prod_b C(n_b, m_b), as a double.
double assignment_count(std::span<const Block> data);

// Throws Error naming the first block that cannot enter a test.
void validate_blocks(std::span<const Block> data);

}  // namespace treegate

#endif  // TREEGATE_PERMTEST_HPP_
