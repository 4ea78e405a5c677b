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


#include "treegate/errorload.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treegate/error.hpp"
#include "treegate/normal.hpp"

namespace treegate {

namespace {

void check_theta(double t, const std::string& where) {
  if (!(t > 0.0 && t <= 1.0)) throw Error("theta must lie in (0, 1] at " + where);
}

// Loads over the nodes with include[id] set (all nodes when include is empty).
LevelLoads loads_over(const HypothesisTree& tree, std::span<const double> theta,
                      std::span<const std::uint8_t> include) {
  if (theta.size() != tree.size()) throw Error("theta must have one value per node");
  const auto depth_count = static_cast<std::size_t>(tree.max_depth());
  LevelLoads out;
  out.exposure.assign(depth_count, 0.0);
  out.load.assign(depth_count, 0.0);
  std::vector<double> reach(tree.size(), 1.0);
  for (const TreeNode& n : tree.nodes()) {
    const std::size_t i = index(n.id);
    check_theta(theta[i], "node '" + n.name + "'");
    if (n.parent) reach[i] = reach[index(*n.parent)] * theta[index(*n.parent)];
    if (!include.empty() && !include[i]) continue;
    const auto d = static_cast<std::size_t>(n.depth) - 1;
    out.exposure[d] += reach[i];
    out.load[d] += reach[i] * theta[i];
  }
  for (double g : out.load) out.total_load += g;
  return out;
}

AlphaSchedule build_schedule(const HypothesisTree& tree, std::vector<double> node_theta,
                             double alpha, double tau, std::span<const std::uint8_t> include) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  if (!(tau > 0.0)) throw Error("tau must be positive");
  const LevelLoads loads = loads_over(tree, node_theta, include);
  AlphaSchedule s;
  s.alpha = alpha;
  s.total_load = loads.total_load;
  s.gating_sufficient = loads.total_load <= 1.0;
  for (int depth = 1; depth <= tree.max_depth(); ++depth) {
    ScheduleLevel level;
    level.depth = depth;
    double theta_sum = 0.0;
    for (NodeId id : tree.level(depth)) {
      if (!include.empty() && !include[index(id)]) continue;
      ++level.nodes;
      theta_sum += node_theta[index(id)];
    }
    if (level.nodes == 0) break;
    const auto d = static_cast<std::size_t>(depth) - 1;
    level.theta_hat = theta_sum / static_cast<double>(level.nodes);
    level.exposure = loads.exposure[d];
    level.error_load = loads.load[d];
    if (depth == 1 || s.gating_sufficient)
      level.alpha_adj = alpha;
    else
      level.alpha_adj = std::min(alpha, tau * alpha / level.exposure);
    s.levels.push_back(level);
  }
  s.node_theta = std::move(node_theta);
  return s;
}

}  // namespace

double power_normal_approx(const PowerModel& model, double n_total) {
  if (!(model.alpha > 0.0 && model.alpha < 0.5)) throw Error("power model alpha must lie in (0, 0.5)");
  if (!(model.d_hat >= 0.0)) throw Error("d_hat must be non-negative");
  if (!(model.allocation > 0.0 && model.allocation < 1.0))
    throw Error("allocation must lie in (0, 1)");
  if (!(n_total >= 2.0)) throw Error("power needs at least 2 units");
  const double a = model.allocation;
  const double z = normal_quantile(1.0 - model.alpha / 2.0);
  const double power = normal_cdf(model.d_hat * std::sqrt(n_total * a * (1.0 - a)) - z);
  return std::max(power, model.alpha);
}

LevelLoads error_load_regular(int k, std::span<const double> thetas) {
  if (k < 1) throw Error("branching factor must be positive");
  LevelLoads out;
  double nodes = 1.0;
  double reach = 1.0;
  for (std::size_t l = 0; l < thetas.size(); ++l) {
    check_theta(thetas[l], "depth " + std::to_string(l + 1));
    out.exposure.push_back(nodes * reach);
    out.load.push_back(out.exposure.back() * thetas[l]);
    out.total_load += out.load.back();
    nodes *= k;
    reach *= thetas[l];
  }
  return out;
}

LevelLoads error_load_irregular(const HypothesisTree& tree, std::span<const double> theta) {
  return loads_over(tree, theta, {});
}

double AlphaSchedule::alpha_at(int depth) const {
  if (depth < 1 || static_cast<std::size_t>(depth) > levels.size())
    throw Error("alpha schedule has no threshold for depth " + std::to_string(depth));
  return levels[static_cast<std::size_t>(depth) - 1].alpha_adj;
}

AlphaSchedule adaptive_schedule(const HypothesisTree& tree, const PowerModel& model,
                                std::span<const std::optional<double>> theta_override,
                                double tau) {
  if (!theta_override.empty() && theta_override.size() != tree.size())
    throw Error("theta override must have one entry per node");
  std::vector<double> theta(tree.size());
  for (const TreeNode& n : tree.nodes()) {
    const std::size_t i = index(n.id);
    if (!theta_override.empty() && theta_override[i]) {
      theta[i] = *theta_override[i];
      check_theta(theta[i], "node '" + n.name + "'");
    } else {
      theta[i] = power_normal_approx(model, static_cast<double>(n.n_units));
    }
  }
  return build_schedule(tree, std::move(theta), model.alpha, tau, {});
}

AlphaSchedule recompute_after_pruning(const AlphaSchedule& schedule, const HypothesisTree& tree,
                                      std::span<const std::uint8_t> alive, int depth_completed,
                                      double tau) {
  if (alive.size() != tree.size()) throw Error("alive mask must have one entry per node");
  if (schedule.node_theta.size() != tree.size())
    throw Error("schedule was computed for a different tree");
  if (depth_completed < 0) throw Error("depth_completed must be non-negative");
  if (!alive[0]) throw Error("pruned tree must keep the root");
  for (const TreeNode& n : tree.nodes()) {
    if (!n.parent) continue;
    const bool parent_alive = alive[index(*n.parent)];
    const bool is_alive = alive[index(n.id)];
    // Below the frontier nothing has been tested, so nothing can be pruned.
    const bool must_follow = n.depth > depth_completed + 1;
    if ((is_alive && !parent_alive) || (must_follow && is_alive != parent_alive))
      throw Error("alive mask is not a pruned prefix of the tree at node '" + n.name + "'");
  }

  AlphaSchedule fresh = build_schedule(tree, schedule.node_theta, schedule.alpha, tau, alive);
  AlphaSchedule out = fresh;
  for (ScheduleLevel& level : out.levels) {
    const auto d = static_cast<std::size_t>(level.depth) - 1;
    if (d >= schedule.levels.size()) continue;
    if (level.depth <= depth_completed)
      level.alpha_adj = schedule.levels[d].alpha_adj;
    else
      level.alpha_adj = std::max(level.alpha_adj, schedule.levels[d].alpha_adj);
  }
  return out;
}

}  // namespace treegate
