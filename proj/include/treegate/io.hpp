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


// File formats: dataset and node-size CSV input; JSON, DOT and CSV output.
// CSV is comma-separated UTF-8 with a header row and '.' decimals.

#ifndef TREEGATE_IO_HPP_
#define TREEGATE_IO_HPP_

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treegate/errorload.hpp"
#include "treegate/gate.hpp"
#include "treegate/permtest.hpp"
#include "treegate/sim.hpp"
#include "treegate/tree.hpp"

namespace treegate {

inline constexpr int kResultSchemaVersion = 1;

// Splits one CSV record; double quotes may wrap fields and "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line);

// Columns unit_id, block_id, treatment, outcome and optional level1, level2,
// ... hierarchy columns (outermost first). Blocks keep first-appearance order.
struct Dataset {
  std::vector<Block> blocks;
  std::vector<std::vector<std::string>> paths;  // per block, may be empty
};

Dataset read_dataset(std::istream& in, const std::string& source = "dataset");
// Tree over the dataset's blocks; a star tree when there are no levels.
HypothesisTree dataset_tree(const Dataset& data);
// Blocks reordered to match tree.leaves().
std::vector<Block> blocks_in_leaf_order(const Dataset& data, const HypothesisTree& tree);

// Columns node_id, parent_id (empty for the root), n_units (may be empty for
// internal nodes) and an optional theta_hat overriding the power model.
struct SizedTree {
  HypothesisTree tree;
  std::vector<std::optional<double>> theta_override;  // by node id
};

SizedTree read_node_sizes(std::istream& in, const std::string& source = "sizes");

void write_result_json(std::ostream& out, const ResultTree& result, const HypothesisTree& tree);
ResultTree read_result_json(std::istream& in);

// omit: tested nodes only. collapse: additionally one box per tested,
// non-rejected internal node standing for its untested subtree.
enum class DotPruned { omit, collapse };
void write_result_dot(std::ostream& out, const ResultTree& result, const HypothesisTree& tree,
                      DotPruned pruned = DotPruned::collapse);
void write_result_csv(std::ostream& out, const ResultTree& result, const HypothesisTree& tree);

void write_schedule_csv(std::ostream& out, const AlphaSchedule& schedule);
void write_weak_csv(std::ostream& out, std::span<const WeakSummary> rows);
void write_strong_csv(std::ostream& out, std::span<const StrongSummary> rows);
void write_dpp_csv(std::ostream& out, const DppSummary& summary);

}  // namespace treegate

#endif  // TREEGATE_IO_HPP_
