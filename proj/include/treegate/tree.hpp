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

// Rooted hypothesis trees over experimental blocks.
//
// Every node carries the hypothesis "no effect in any block under this node".
// Node ids follow breadth-first order with children in insertion order. Leaves
// hold exactly one block and appear in depth-first order in leaves(), so the
// blocks under any node form one contiguous range of that list.

#ifndef TREEGATE_TREE_HPP_
#define TREEGATE_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace treegate {

enum class NodeId : std::uint32_t {};

constexpr std::size_t index(NodeId id) { return static_cast<std::size_t>(id); }
constexpr NodeId node_id(std::size_t i) {
  return static_cast<NodeId>(static_cast<std::uint32_t>(i));
}

struct TreeNode {
  NodeId id{};
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  int depth = 1;  // root = 1
  // Block id for leaves; slash-joined hierarchy path for internal nodes.
  std::string name;
  std::int64_t n_units = 0;
  // Range into HypothesisTree::leaves() covering this node's blocks.
  std::size_t leaf_begin = 0;
  std::size_t leaf_end = 0;
  std::optional<bool> is_null;

  bool is_leaf() const { return children.empty(); }
  std::size_t n_blocks() const { return leaf_end - leaf_begin; }
};

// One input row of HypothesisTree::from_paths. path holds the group labels
// above the block, outermost first, root excluded.
struct PathRow {
  std::string block_id;
  std::vector<std::string> path;
  std::int64_t n_units = 1;
};

// One input row of HypothesisTree::from_parent_table. An empty parent marks
// the root; n_units may be omitted for internal nodes (derived from children).
struct ParentRow {
  std::string node_id;
  std::string parent_id;
  std::optional<std::int64_t> n_units;
};

class HypothesisTree {
 public:
  // Complete k-ary tree with `levels` levels; leaves carry units_per_leaf.
  // Node names are 1-based breadth-first numbers ("1" is the root).
  static HypothesisTree regular(int k, int levels, std::int64_t units_per_leaf);

  // Irregular tree whose internal nodes are the distinct path prefixes.
  static HypothesisTree from_paths(std::span<const PathRow> rows);

  // Tree from explicit parent links (node-size tables). Leaves become blocks
  // named by their node id.
  static HypothesisTree from_parent_table(std::span<const ParentRow> rows);

  // Copy with is_null set on every node: a node is non-null iff some leaf
  // below it is in non_null_blocks.
  HypothesisTree with_truth(std::span<const std::string> non_null_blocks) const;
  // Same, addressing leaves by their position in leaves().
  HypothesisTree with_truth_by_leaf(std::span<const std::size_t> non_null_leaf_positions) const;

  const TreeNode& node(NodeId id) const { return nodes_[index(id)]; }
  const TreeNode& root() const { return nodes_.front(); }
  std::span<const TreeNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  int max_depth() const { return static_cast<int>(levels_.size()); }

  // Leaves in depth-first order.
  std::span<const NodeId> leaves() const { return leaves_; }
  // Leaves (blocks) under a node.
  std::span<const NodeId> leaves_under(NodeId id) const;
  // Nodes at a depth (1-based), in id order.
  std::span<const NodeId> level(int depth) const;

  std::optional<NodeId> find(std::string_view name) const;

  bool labeled() const;
  // True-null nodes whose parent is non-null (the root counts if it is null).
  std::size_t exposed_nulls(int depth) const;
  std::size_t non_null_count(int depth) const;

 private:
  HypothesisTree() = default;
  // Computes depths, levels, leaf order/ranges and validates structure.
  void finalize();

  std::vector<TreeNode> nodes_;
  std::vector<NodeId> leaves_;
  std::vector<std::vector<NodeId>> levels_;
  std::unordered_map<std::string, NodeId> by_name_;
};

}  // namespace treegate

#endif  // TREEGATE_TREE_HPP_
