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

#include "treegate/tree.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "treegate/error.hpp"

namespace treegate {

namespace {

constexpr std::int64_t kUnknownUnits = -1;

}  // namespace

HypothesisTree HypothesisTree::regular(int k, int levels, std::int64_t units_per_leaf) {
  if (k < 2) throw Error("regular tree needs k >= 2, got " + std::to_string(k));
  if (levels < 2) throw Error("regular tree needs at least 2 levels, got " + std::to_string(levels));
  if (units_per_leaf < 1) throw Error("units_per_leaf must be >= 1");

  std::size_t total = 0;
  std::size_t width = 1;
  for (int l = 1; l <= levels; ++l) {
    total += width;
    if (l < levels) {
      if (width > (std::size_t{1} << 26) / static_cast<std::size_t>(k))
        throw Error("regular tree too large");
      width *= static_cast<std::size_t>(k);
    }
  }

  HypothesisTree tree;
  tree.nodes_.resize(total);
  std::size_t first_child = 1;
  std::size_t level_begin = 0;
  width = 1;
  for (int l = 1; l <= levels; ++l) {
    for (std::size_t i = level_begin; i < level_begin + width; ++i) {
      TreeNode& node = tree.nodes_[i];
      node.id = node_id(i);
      node.name = std::to_string(i + 1);
      node.n_units = (l == levels) ? units_per_leaf : kUnknownUnits;
      if (l < levels) {
        node.children.reserve(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
          node.children.push_back(node_id(first_child));
          tree.nodes_[first_child].parent = node.id;
          ++first_child;
        }
      }
    }
    level_begin += width;
    width *= static_cast<std::size_t>(k);
  }
  tree.finalize();
  return tree;
}

HypothesisTree HypothesisTree::from_paths(std::span<const PathRow> rows) {
  if (rows.empty()) throw Error("cannot build a tree from zero blocks");

  HypothesisTree tree;
  TreeNode root;
  root.name = "root";
  root.n_units = kUnknownUnits;
  tree.nodes_.push_back(root);

  // Internal nodes keyed by their full path.
  std::map<std::vector<std::string>, std::size_t> groups;
  groups[{}] = 0;
  std::set<std::string> seen_blocks;
  std::set<std::vector<std::string>> block_paths;

  for (const PathRow& row : rows) {
    if (row.block_id.empty()) throw Error("empty block id");
    if (!seen_blocks.insert(row.block_id).second)
      throw Error("duplicate block id '" + row.block_id + "'");
    if (row.n_units < 1)
      throw Error("block '" + row.block_id + "' has n_units < 1");
    block_paths.insert(row.path);

    std::size_t parent = 0;
    std::vector<std::string> prefix;
    for (const std::string& label : row.path) {
      prefix.push_back(label);
      auto it = groups.find(prefix);
      if (it == groups.end()) {
        TreeNode group;
        group.id = node_id(tree.nodes_.size());
        group.parent = node_id(parent);
        std::string name;
        for (const std::string& part : prefix) {
          if (!name.empty()) name += '/';
          name += part;
        }
        group.name = std::move(name);
        group.n_units = kUnknownUnits;
        tree.nodes_[parent].children.push_back(group.id);
        it = groups.emplace(prefix, tree.nodes_.size()).first;
        tree.nodes_.push_back(std::move(group));
      }
      parent = it->second;
    }
    TreeNode leaf;
    leaf.id = node_id(tree.nodes_.size());
    leaf.parent = node_id(parent);
    leaf.name = row.block_id;
    leaf.n_units = row.n_units;
    tree.nodes_[parent].children.push_back(leaf.id);
    tree.nodes_.push_back(std::move(leaf));
  }

  // A block sitting at a group path that other blocks extend would make the
  // group both a block and a container.
  for (const auto& path : block_paths) {
    for (const auto& other : block_paths) {
      if (other.size() > path.size() && std::equal(path.begin(), path.end(), other.begin())) {
        std::string shown = path.empty() ? "(root)" : path.front();
        for (std::size_t i = 1; i < path.size(); ++i) shown += "/" + path[i];
        throw Error("hierarchy path '" + shown + "' is a strict prefix of another block's path");
      }
    }
  }

  tree.finalize();
  return tree;
}

HypothesisTree HypothesisTree::from_parent_table(std::span<const ParentRow> rows) {
  if (rows.empty()) throw Error("empty node table");
  HypothesisTree tree;
  std::unordered_map<std::string, std::size_t> position;
  for (const ParentRow& row : rows) {
    if (row.node_id.empty()) throw Error("empty node id");
    if (!position.emplace(row.node_id, tree.nodes_.size()).second)
      throw Error("duplicate node id '" + row.node_id + "'");
    TreeNode node;
    node.id = node_id(tree.nodes_.size());
    node.name = row.node_id;
    node.n_units = row.n_units.value_or(kUnknownUnits);
    if (row.n_units && *row.n_units < 1)
      throw Error("node '" + row.node_id + "' has n_units < 1");
    tree.nodes_.push_back(std::move(node));
  }
  std::size_t roots = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].parent_id.empty()) {
      ++roots;
      continue;
    }
    auto it = position.find(rows[i].parent_id);
    if (it == position.end())
      throw Error("node '" + rows[i].node_id + "' has unknown parent '" + rows[i].parent_id + "'");
    if (it->second == i) throw Error("node '" + rows[i].node_id + "' is its own parent");
    tree.nodes_[i].parent = node_id(it->second);
    tree.nodes_[it->second].children.push_back(node_id(i));
  }
  if (roots != 1) throw Error("node table must have exactly one root, found " + std::to_string(roots));
  for (const TreeNode& node : tree.nodes_) {
    if (node.children.empty() && node.n_units == kUnknownUnits)
      throw Error("leaf node '" + node.name + "' has no n_units");
  }
  tree.finalize();
  return tree;
}

void HypothesisTree::finalize() {
  const std::size_t n = nodes_.size();
  std::size_t root = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!nodes_[i].parent) {
      if (root != n) throw Error("tree has more than one root");
      root = i;
    }
  }
  if (root == n) throw Error("tree has no root");

  // Breadth-first renumbering; a node missed here sits on a cycle.
  std::vector<std::size_t> order;
  order.reserve(n);
  order.push_back(root);
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (NodeId child : nodes_[order[head]].children) order.push_back(index(child));
    if (order.size() > n) throw Error("tree structure is cyclic");
  }
  if (order.size() != n) throw Error("tree structure is cyclic or disconnected");

  std::vector<std::size_t> new_index(n);
  for (std::size_t i = 0; i < n; ++i) new_index[order[i]] = i;
  std::vector<TreeNode> renumbered;
  renumbered.reserve(n);
  for (std::size_t old : order) {
    TreeNode node = std::move(nodes_[old]);
    node.id = node_id(new_index[old]);
    if (node.parent) node.parent = node_id(new_index[index(*node.parent)]);
    for (NodeId& child : node.children) child = node_id(new_index[index(child)]);
    renumbered.push_back(std::move(node));
  }
  nodes_ = std::move(renumbered);

  levels_.clear();
  for (TreeNode& node : nodes_) {
    node.depth = node.parent ? nodes_[index(*node.parent)].depth + 1 : 1;
    if (static_cast<std::size_t>(node.depth) > levels_.size()) levels_.emplace_back();
    levels_[static_cast<std::size_t>(node.depth) - 1].push_back(node.id);
  }

  // Children follow their parents in id order, so a reverse sweep sees every
  // child before its parent.
  for (std::size_t i = n; i-- > 0;) {
    TreeNode& node = nodes_[i];
    if (node.is_leaf()) continue;
    std::int64_t sum = 0;
    for (NodeId child : node.children) sum += nodes_[index(child)].n_units;
    if (node.n_units != kUnknownUnits && node.n_units != sum)
      throw Error("node '" + node.name + "' has n_units " + std::to_string(node.n_units) +
                  " but its children sum to " + std::to_string(sum));
    node.n_units = sum;
  }

  // Depth-first leaf order with contiguous ranges.
  leaves_.clear();
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // node, next child
  stack.emplace_back(0, 0);
  while (!stack.empty()) {
    auto& [current, next] = stack.back();
    TreeNode& node = nodes_[current];
    if (next == 0) node.leaf_begin = leaves_.size();
    if (node.is_leaf()) {
      leaves_.push_back(node.id);
      node.leaf_end = leaves_.size();
      stack.pop_back();
      continue;
    }
    if (next < node.children.size()) {
      std::size_t child = index(node.children[next]);
      ++next;
      stack.emplace_back(child, 0);
    } else {
      node.leaf_end = leaves_.size();
      stack.pop_back();
    }
  }

  by_name_.clear();
  by_name_.reserve(n);
  for (const TreeNode& node : nodes_) {
    if (!by_name_.emplace(node.name, node.id).second)
      throw Error("duplicate node name '" + node.name + "'");
  }
}

HypothesisTree HypothesisTree::with_truth(std::span<const std::string> non_null_blocks) const {
  std::vector<std::size_t> positions;
  positions.reserve(non_null_blocks.size());
  for (const std::string& block : non_null_blocks) {
    auto found = find(block);
    if (!found || !node(*found).is_leaf()) throw Error("unknown block id '" + block + "'");
    positions.push_back(node(*found).leaf_begin);
  }
  return with_truth_by_leaf(positions);
}

HypothesisTree HypothesisTree::with_truth_by_leaf(
    std::span<const std::size_t> non_null_leaf_positions) const {
  HypothesisTree labeled = *this;
  std::vector<char> leaf_non_null(leaves_.size(), 0);
  for (std::size_t pos : non_null_leaf_positions) {
    if (pos >= leaves_.size()) throw Error("leaf position out of range");
    leaf_non_null[pos] = 1;
  }
  // Prefix sums make each node's "any non-null leaf below" an O(1) query.
  std::vector<std::size_t> prefix(leaves_.size() + 1, 0);
  for (std::size_t i = 0; i < leaves_.size(); ++i) prefix[i + 1] = prefix[i] + leaf_non_null[i];
  for (TreeNode& node : labeled.nodes_)
    node.is_null = prefix[node.leaf_end] == prefix[node.leaf_begin];
  return labeled;
}

std::span<const NodeId> HypothesisTree::leaves_under(NodeId id) const {
  const TreeNode& n = node(id);
  return std::span<const NodeId>(leaves_).subspan(n.leaf_begin, n.n_blocks());
}

std::span<const NodeId> HypothesisTree::level(int depth) const {
  if (depth < 1 || depth > max_depth()) return {};
  return levels_[static_cast<std::size_t>(depth) - 1];
}

std::optional<NodeId> HypothesisTree::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

bool HypothesisTree::labeled() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const TreeNode& n) { return n.is_null.has_value(); });
}

std::size_t HypothesisTree::exposed_nulls(int depth) const {
  if (!labeled()) throw Error("tree has no truth labels");
  std::size_t count = 0;
  for (NodeId id : level(depth)) {
    const TreeNode& n = node(id);
    if (!*n.is_null) continue;
    if (!n.parent || !*node(*n.parent).is_null) ++count;
  }
  return count;
}

std::size_t HypothesisTree::non_null_count(int depth) const {
  if (!labeled()) throw Error("tree has no truth labels");
  std::size_t count = 0;
  for (NodeId id : level(depth))
    if (!*node(id).is_null) ++count;
  return count;
}

}  // namespace treegate
