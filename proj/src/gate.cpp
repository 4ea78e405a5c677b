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


#include "treegate/gate.hpp"

#include <stdexcept>

#include "treegate/error.hpp"
#include "treegate/pvalue_adjust.hpp"

namespace treegate {

namespace {

constexpr std::pair<GateVariant, std::string_view> kVariantNames[] = {
    {GateVariant::unadjusted, "unadjusted"},
    {GateVariant::local_hommel, "local_hommel"},
    {GateVariant::local_bh, "local_bh"},
    {GateVariant::adaptive, "adaptive"},
    {GateVariant::adaptive_hommel, "adaptive_hommel"},
    {GateVariant::adaptive_pruned, "adaptive_pruned"},
};

std::vector<double> adjust_group(GateVariant v, const std::vector<double>& p) {
  switch (v) {
    case GateVariant::local_hommel:
    case GateVariant::adaptive_hommel:
      return adjust_hommel(p);
    case GateVariant::local_bh:
      return adjust_bh(p);
    default:
      return p;
  }
}

bool adjusts_locally(GateVariant v) {
  return v == GateVariant::local_hommel || v == GateVariant::local_bh ||
         v == GateVariant::adaptive_hommel;
}

double fetch(const PValueSource& source, const TreeNode& n) {
  const std::optional<double> p = source(n.id);
  if (!p) throw Error("no p-value for reachable node '" + n.name + "'");
  if (!(*p >= 0.0 && *p <= 1.0)) throw Error("p-value outside [0, 1] at node '" + n.name + "'");
  return *p;
}

// Surviving nodes after testing depths 1..depth_completed.
std::vector<std::uint8_t> alive_mask(const HypothesisTree& tree, const ResultTree& result,
                                     int depth_completed) {
  std::vector<std::uint8_t> alive(tree.size(), 0);
  alive[0] = 1;
  for (const TreeNode& n : tree.nodes()) {
    if (!n.parent) continue;
    const TreeNode& parent = tree.node(*n.parent);
    alive[index(n.id)] = alive[index(parent.id)] &&
                         (parent.depth > depth_completed || result.rejected(parent.id));
  }
  return alive;
}

void check_gating(const ResultTree& result) {
  for (const NodeOutcome& o : result.outcomes()) {
    if (o.rejected && !o.tested) throw std::logic_error("rejected node was not tested");
    if (o.parent && !result.rejected(*o.parent))
      throw std::logic_error("node tested although its parent was not rejected");
  }
}

}  // namespace

std::string_view to_string(GateVariant v) {
  for (const auto& [variant, name] : kVariantNames)
    if (variant == v) return name;
  return "unknown";
}

std::string_view to_string(BottomUpMethod m) {
  return m == BottomUpMethod::bu_hommel ? "bu_hommel" : "bu_bh";
}

GateVariant parse_variant(std::string_view name) {
  for (const auto& [variant, n] : kVariantNames)
    if (n == name) return variant;
  throw Error("unknown variant '" + std::string(name) +
              "' (expected unadjusted, local_hommel, local_bh, adaptive, adaptive_hommel or "
              "adaptive_pruned)");
}

bool uses_schedule(GateVariant v) {
  return v == GateVariant::adaptive || v == GateVariant::adaptive_hommel ||
         v == GateVariant::adaptive_pruned;
}

void ResultTree::add(const NodeOutcome& outcome) {
  const auto key = static_cast<std::uint32_t>(index(outcome.id));
  if (!slot_.emplace(key, static_cast<std::uint32_t>(outcomes_.size())).second)
    throw Error("node " + std::to_string(key) + " recorded twice");
  outcomes_.push_back(outcome);
}

const NodeOutcome* ResultTree::find(NodeId id) const {
  const auto it = slot_.find(static_cast<std::uint32_t>(index(id)));
  return it == slot_.end() ? nullptr : &outcomes_[it->second];
}

std::size_t ResultTree::rejections() const {
  std::size_t n = 0;
  for (const NodeOutcome& o : outcomes_) n += o.rejected;
  return n;
}

std::vector<std::size_t> ResultTree::rejections_by_depth() const {
  std::vector<std::size_t> out;
  for (const NodeOutcome& o : outcomes_) {
    if (!o.rejected) continue;
    const auto d = static_cast<std::size_t>(o.depth);
    if (out.size() < d) out.resize(d, 0);
    ++out[d - 1];
  }
  return out;
}

ResultTree run_topdown(const HypothesisTree& tree, const PValueSource& p_source,
                       GateVariant variant, const AlphaSchedule* schedule, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  std::optional<AlphaSchedule> current;
  if (uses_schedule(variant)) {
    if (!schedule) throw Error("variant '" + std::string(to_string(variant)) + "' needs an alpha schedule");
    if (static_cast<int>(schedule->levels.size()) < tree.max_depth())
      throw Error("alpha schedule covers fewer depths than the tree");
    current = *schedule;
  }
  auto threshold = [&](int depth) { return current ? current->alpha_at(depth) : alpha; };
  auto decide = [&](double p, double t) { return t > 0.0 && p <= t; };

  ResultTree result(variant, alpha);
  std::size_t leaves_tested = 0;

  const TreeNode& root = tree.root();
  NodeOutcome top;
  top.id = root.id;
  top.tested = true;
  top.p_value = fetch(p_source, root);
  top.alpha_applied = threshold(1);
  top.rejected = decide(*top.p_value, *top.alpha_applied);
  result.add(top);
  leaves_tested += root.is_leaf();

  std::vector<NodeId> frontier;
  if (top.rejected) frontier.push_back(root.id);
  std::vector<double> group_p;
  for (int depth = 2; !frontier.empty(); ++depth) {
    if (variant == GateVariant::adaptive_pruned && depth > 2)
      current = recompute_after_pruning(*current, tree, alive_mask(tree, result, depth - 1),
                                        depth - 1);
    std::vector<NodeId> next;
    for (NodeId parent : frontier) {
      const TreeNode& pn = tree.node(parent);
      if (pn.is_leaf()) continue;
      group_p.clear();
      for (NodeId c : pn.children) group_p.push_back(fetch(p_source, tree.node(c)));
      const std::vector<double> adjusted = adjust_group(variant, group_p);
      const double t = threshold(depth);
      for (std::size_t i = 0; i < pn.children.size(); ++i) {
        const TreeNode& child = tree.node(pn.children[i]);
        NodeOutcome o;
        o.id = child.id;
        o.parent = parent;
        o.depth = depth;
        o.tested = true;
        o.p_value = group_p[i];
        if (adjusts_locally(variant)) o.adjusted_p = adjusted[i];
        o.alpha_applied = t;
        o.rejected = decide(adjusted[i], t);
        result.add(o);
        leaves_tested += child.is_leaf();
        if (o.rejected) next.push_back(child.id);
      }
    }
    frontier = std::move(next);
  }
  result.set_leaves_tested(leaves_tested);
  check_gating(result);
  return result;
}

BottomUpResult run_bottom_up(std::span<const double> leaf_p, BottomUpMethod method, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  BottomUpResult out;
  out.adjusted = method == BottomUpMethod::bu_hommel ? adjust_hommel(leaf_p) : adjust_bh(leaf_p);
  out.rejected.resize(out.adjusted.size());
  for (std::size_t i = 0; i < out.adjusted.size(); ++i)
    out.rejected[i] = alpha > 0.0 && out.adjusted[i] <= alpha;
  return out;
}

namespace {

struct Totals {
  std::size_t nulls = 0, non_nulls = 0, leaf_nulls = 0, leaf_non_nulls = 0;
};

Totals count_truth(const HypothesisTree& tree) {
  if (!tree.labeled()) throw Error("scoring needs a truth-labeled tree");
  Totals t;
  for (const TreeNode& n : tree.nodes()) {
    const bool null = *n.is_null;
    (null ? t.nulls : t.non_nulls)++;
    if (n.is_leaf()) (null ? t.leaf_nulls : t.leaf_non_nulls)++;
  }
  return t;
}

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

void finish(RunMetrics& m, const Totals& t) {
  m.node_false_rejection = m.false_rejections > 0;
  m.leaf_false_rejection = m.leaf_false_rejections > 0;
  m.false_rejection_prop = ratio(m.false_rejections, t.nulls);
  m.power = ratio(m.true_rejections, t.non_nulls);
  m.leaf_false_rejection_prop = ratio(m.leaf_false_rejections, t.leaf_nulls);
  m.leaf_power = ratio(m.leaf_true_rejections, t.leaf_non_nulls);
}

}  // namespace

RunMetrics score_result(const ResultTree& result, const HypothesisTree& tree) {
  const Totals totals = count_truth(tree);
  RunMetrics m;
  m.nodes_tested = result.nodes_tested();
  m.leaves_tested = result.leaves_tested();
  for (const NodeOutcome& o : result.outcomes()) {
    if (!o.rejected) continue;
    const TreeNode& n = tree.node(o.id);
    const bool null = *n.is_null;
    (null ? m.false_rejections : m.true_rejections)++;
    if (n.is_leaf()) (null ? m.leaf_false_rejections : m.leaf_true_rejections)++;
  }
  finish(m, totals);
  return m;
}

RunMetrics score_bottom_up(std::span<const std::uint8_t> leaf_rejected, const HypothesisTree& tree) {
  if (leaf_rejected.size() != tree.leaves().size())
    throw Error("bottom-up result must have one entry per leaf");
  const Totals totals = count_truth(tree);
  RunMetrics m;
  m.nodes_tested = m.leaves_tested = leaf_rejected.size();
  for (std::size_t i = 0; i < leaf_rejected.size(); ++i) {
    if (!leaf_rejected[i]) continue;
    const bool null = *tree.node(tree.leaves()[i]).is_null;
    (null ? m.leaf_false_rejections : m.leaf_true_rejections)++;
  }
  m.true_rejections = m.leaf_true_rejections;
  m.false_rejections = m.leaf_false_rejections;
  finish(m, totals);
  // Bottom-up tests only leaves, so node-level rates are leaf rates.
  m.false_rejection_prop = m.leaf_false_rejection_prop;
  m.power = m.leaf_power;
  return m;
}

}  // namespace treegate
