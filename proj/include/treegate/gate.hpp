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


// Top-down gated testing. A node is tested only when its parent was rejected;
// a non-rejection or a leaf ends the branch.

#ifndef TREEGATE_GATE_HPP_
#define TREEGATE_GATE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treegate/errorload.hpp"
#include "treegate/tree.hpp"

namespace treegate {

enum class GateVariant {
  unadjusted,
  local_hommel,
  local_bh,
  adaptive,
  adaptive_hommel,
  adaptive_pruned,
};

enum class BottomUpMethod { bu_hommel, bu_bh };

std::string_view to_string(GateVariant v);
std::string_view to_string(BottomUpMethod m);
GateVariant parse_variant(std::string_view name);
bool uses_schedule(GateVariant v);

struct NodeOutcome {
  NodeId id{};
  std::optional<NodeId> parent;
  int depth = 1;
  bool tested = false;
  std::optional<double> p_value;
  // Sibling-group adjusted p-value for the local variants.
  std::optional<double> adjusted_p;
  std::optional<double> alpha_applied;
  bool rejected = false;

  bool operator==(const NodeOutcome&) const = default;
};

// Outcomes of the tested nodes only, in testing order, so a run on a huge
// tree costs memory proportional to what was actually tested.
class ResultTree {
 public:
  ResultTree() = default;
  ResultTree(GateVariant variant, double alpha) : variant_(variant), alpha_(alpha) {}

  void add(const NodeOutcome& outcome);
  // Null for nodes that were never tested.
  const NodeOutcome* find(NodeId id) const;
  bool rejected(NodeId id) const {
    const NodeOutcome* o = find(id);
    return o && o->rejected;
  }

  std::span<const NodeOutcome> outcomes() const { return outcomes_; }
  GateVariant variant() const { return variant_; }
  double alpha() const { return alpha_; }
  std::size_t nodes_tested() const { return outcomes_.size(); }
  std::size_t leaves_tested() const { return leaves_tested_; }
  std::size_t rejections() const;
  // Index 0 is depth 1.
  std::vector<std::size_t> rejections_by_depth() const;
  void set_leaves_tested(std::size_t n) { leaves_tested_ = n; }

  bool operator==(const ResultTree& other) const {
    return variant_ == other.variant_ && alpha_ == other.alpha_ &&
           leaves_tested_ == other.leaves_tested_ && outcomes_ == other.outcomes_;
  }

 private:
  GateVariant variant_ = GateVariant::unadjusted;
  double alpha_ = 0.05;
  std::size_t leaves_tested_ = 0;
  std::vector<NodeOutcome> outcomes_;
  std::unordered_map<std::uint32_t, std::uint32_t> slot_;
};

// Returns the p-value for a node, or nullopt when none is available.
using PValueSource = std::function<std::optional<double>(NodeId)>;

// schedule is required for the adaptive variants and ignored otherwise.
ResultTree run_topdown(const HypothesisTree& tree, const PValueSource& p_source,
                       GateVariant variant, const AlphaSchedule* schedule, double alpha);

struct BottomUpResult {
  std::vector<double> adjusted;
  std::vector<std::uint8_t> rejected;
};

BottomUpResult run_bottom_up(std::span<const double> leaf_p, BottomUpMethod method, double alpha);

struct RunMetrics {
  bool node_false_rejection = false;
  bool leaf_false_rejection = false;
  std::size_t true_rejections = 0;
  std::size_t false_rejections = 0;
  std::size_t leaf_true_rejections = 0;
  std::size_t leaf_false_rejections = 0;
  // Among all true nulls / all non-nulls in the tree.
  double false_rejection_prop = 0.0;
  double power = 0.0;
  double leaf_false_rejection_prop = 0.0;
  double leaf_power = 0.0;
  std::size_t nodes_tested = 0;
  std::size_t leaves_tested = 0;
};

// tree must carry truth labels.
RunMetrics score_result(const ResultTree& result, const HypothesisTree& tree);
// Bottom-up rejections, index-aligned with tree.leaves().
RunMetrics score_bottom_up(std::span<const std::uint8_t> leaf_rejected, const HypothesisTree& tree);

}  // namespace treegate

#endif  // TREEGATE_GATE_HPP_
