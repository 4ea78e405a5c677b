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


// Power model, error loads and the adaptive per-depth alpha schedule.
//
// For a node i at depth l the procedure reaches i with probability
// prod_{j in anc(i)} theta_j. Per depth we track two sums over the nodes:
//   exposure: sum of reach probabilities (strict ancestors only), the
//             denominator of the adjusted threshold;
//   load:     sum of reach probability times the node's own theta, whose
//             total decides whether gating alone already controls FWER.

#ifndef TREEGATE_ERRORLOAD_HPP_
#define TREEGATE_ERRORLOAD_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treegate/tree.hpp"

namespace treegate {

struct PowerModel {
  double d_hat = 0.0;  // planning effect size (Cohen's d)
  double alpha = 0.05;
  double allocation = 0.5;  // treated fraction
};

// Phi(d_hat * sqrt(n a (1 - a)) - z_{1 - alpha/2}), floored at alpha.
double power_normal_approx(const PowerModel& model, double n_total);

struct LevelLoads {
  std::vector<double> exposure;
  std::vector<double> load;
  double total_load = 0.0;
};

// Complete k-ary tree with thetas.size() levels; thetas[l] is the rejection
// probability of a node at depth l + 1.
LevelLoads error_load_regular(int k, std::span<const double> thetas);

// theta is indexed by node id and must hold a value in (0, 1] for every node.
LevelLoads error_load_irregular(const HypothesisTree& tree, std::span<const double> theta);

struct ScheduleLevel {
  int depth = 1;
  std::size_t nodes = 0;
  double theta_hat = 0.0;  // mean node theta at this depth
  double exposure = 0.0;
  double error_load = 0.0;
  double alpha_adj = 0.0;
};

struct AlphaSchedule {
  double alpha = 0.05;
  std::vector<ScheduleLevel> levels;  // depth 1 first
  bool gating_sufficient = false;     // total load <= 1
  double total_load = 0.0;
  std::vector<double> node_theta;  // by node id

  // Threshold for a depth; throws when the schedule does not cover it.
  double alpha_at(int depth) const;
};

// Adaptive thresholds: alpha at every depth when the total load is at most 1,
// otherwise alpha at the root and min(alpha, tau * alpha / exposure) below.
// theta_override (by node id, may be empty) replaces the model's theta for
// selected nodes. tau > 1 is an experimental relaxation without a control
// guarantee.
AlphaSchedule adaptive_schedule(const HypothesisTree& tree, const PowerModel& model,
                                std::span<const std::optional<double>> theta_override = {},
                                double tau = 1.0);

// Schedule for the subtree still reachable after testing depths
// 1..depth_completed. alive[id] marks surviving nodes: the root, and every
// node whose ancestors at completed depths were all rejected. Thresholds at
// deeper depths never decrease; depths with no surviving node are dropped.
AlphaSchedule recompute_after_pruning(const AlphaSchedule& schedule, const HypothesisTree& tree,
                                      std::span<const std::uint8_t> alive, int depth_completed,
                                      double tau = 1.0);

}  // namespace treegate

#endif  // TREEGATE_ERRORLOAD_HPP_
