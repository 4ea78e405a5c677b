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


#include "treegate/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "treegate/error.hpp"

namespace treegate {

namespace {

using Json = nlohmann::ordered_json;

std::string where(const std::string& source, int line) {
  return source + ":" + std::to_string(line) + ": ";
}

bool parse_double(std::string_view text, double& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

bool parse_int(std::string_view text, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line;  // source line of each row
};

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string text;
  int number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields = split_csv_line(text);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(where(source, number) + "expected " + std::to_string(t.header.size()) +
                  " fields, got " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line.push_back(number);
  }
  if (t.header.empty()) throw Error(source + ": missing header row");
  return t;
}

std::optional<std::size_t> column(const CsvTable& t, std::string_view name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - t.header.begin());
}

std::size_t required_column(const CsvTable& t, std::string_view name, const std::string& source) {
  const auto c = column(t, name);
  if (!c) throw Error(source + ": missing required column '" + std::string(name) + "'");
  return *c;
}

std::string num(double v) { return fmt::format("{:.6g}", v); }

std::string opt_num(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : ""; }

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::size_t subtree_size(const HypothesisTree& tree, NodeId id) {
  std::size_t count = 0;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const TreeNode& n = tree.node(stack.back());
    stack.pop_back();
    ++count;
    stack.insert(stack.end(), n.children.begin(), n.children.end());
  }
  return count;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_double(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw Error("unterminated quoted field");
  return fields;
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  const CsvTable t = read_csv(in, source);
  std::vector<std::string> missing;
  for (const char* name : {"unit_id", "block_id", "treatment", "outcome"})
    if (!column(t, name)) missing.emplace_back(name);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(source + ": missing required columns: " + list);
  }
  const std::size_t c_unit = *column(t, "unit_id");
  const std::size_t c_block = *column(t, "block_id");
  const std::size_t c_treat = *column(t, "treatment");
  const std::size_t c_out = *column(t, "outcome");

  // level1, level2, ... in numeric order.
  std::map<int, std::size_t> levels;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (h.rfind("level", 0) != 0 || h.size() == 5) continue;
    std::int64_t n = 0;
    if (!parse_int(std::string_view(h).substr(5), n) || n < 1) continue;
    if (!levels.emplace(static_cast<int>(n), c).second)
      throw Error(source + ": duplicate hierarchy column '" + h + "'");
  }

  Dataset data;
  std::unordered_map<std::string, std::size_t> block_index;
  std::set<std::string> units;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string at = where(source, t.line[r]);
    if (!units.insert(row[c_unit]).second) throw Error(at + "duplicate unit_id '" + row[c_unit] + "'");
    const std::string& block_id = row[c_block];
    if (block_id.empty()) throw Error(at + "empty block_id");
    std::uint8_t z = 0;
    if (row[c_treat] == "1")
      z = 1;
    else if (row[c_treat] != "0")
      throw Error(at + "treatment must be 0 or 1, got '" + row[c_treat] + "'");
    double y = 0;
    if (!parse_double(row[c_out], y) || !std::isfinite(y))
      throw Error(at + "outcome is not a finite number: '" + row[c_out] + "'");

    std::vector<std::string> path;
    bool ended = false;
    for (const auto& [n, c] : levels) {
      if (row[c].empty()) {
        ended = true;
      } else if (ended) {
        throw Error(at + "hierarchy column '" + t.header[c] + "' follows an empty level");
      } else {
        path.push_back(row[c]);
      }
    }

    auto [it, inserted] = block_index.emplace(block_id, data.blocks.size());
    if (inserted) {
      data.blocks.push_back({block_id, {}, {}});
      data.paths.push_back(path);
    } else if (data.paths[it->second] != path) {
      throw Error(at + "hierarchy levels differ within block '" + block_id + "'");
    }
    Block& b = data.blocks[it->second];
    b.treatment.push_back(z);
    b.outcome.push_back(y);
  }
  if (data.blocks.empty()) throw Error(source + ": no data rows");

  std::string degenerate;
  for (const Block& b : data.blocks) {
    const std::size_t m = b.treated();
    if (m == 0 || m == b.size()) degenerate += (degenerate.empty() ? "" : ", ") + b.id;
  }
  if (!degenerate.empty())
    throw Error(source + ": blocks without both treated and control units: " + degenerate);
  return data;
}

HypothesisTree dataset_tree(const Dataset& data) {
  std::vector<PathRow> rows;
  rows.reserve(data.blocks.size());
  for (std::size_t b = 0; b < data.blocks.size(); ++b)
    rows.push_back({data.blocks[b].id, data.paths[b], static_cast<std::int64_t>(data.blocks[b].size())});
  return HypothesisTree::from_paths(rows);
}

std::vector<Block> blocks_in_leaf_order(const Dataset& data, const HypothesisTree& tree) {
  std::unordered_map<std::string, const Block*> by_id;
  for (const Block& b : data.blocks) by_id.emplace(b.id, &b);
  std::vector<Block> out;
  out.reserve(tree.leaves().size());
  for (NodeId leaf : tree.leaves()) {
    const auto it = by_id.find(tree.node(leaf).name);
    if (it == by_id.end()) throw Error("leaf '" + tree.node(leaf).name + "' has no block data");
    out.push_back(*it->second);
  }
  return out;
}

SizedTree read_node_sizes(std::istream& in, const std::string& source) {
  const CsvTable t = read_csv(in, source);
  const std::size_t c_node = required_column(t, "node_id", source);
  const std::size_t c_parent = required_column(t, "parent_id", source);
  const std::size_t c_units = required_column(t, "n_units", source);
  const auto c_theta = column(t, "theta_hat");

  std::vector<ParentRow> rows;
  std::vector<std::pair<std::string, double>> thetas;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string at = where(source, t.line[r]);
    ParentRow pr{row[c_node], row[c_parent], std::nullopt};
    if (pr.node_id.empty()) throw Error(at + "empty node_id");
    if (!row[c_units].empty()) {
      std::int64_t n = 0;
      if (!parse_int(row[c_units], n) || n < 1)
        throw Error(at + "n_units must be a positive integer, got '" + row[c_units] + "'");
      pr.n_units = n;
    }
    if (c_theta && !row[*c_theta].empty()) {
      double th = 0;
      if (!parse_double(row[*c_theta], th) || !(th > 0.0 && th <= 1.0))
        throw Error(at + "theta_hat must lie in (0, 1], got '" + row[*c_theta] + "'");
      thetas.emplace_back(pr.node_id, th);
    }
    rows.push_back(std::move(pr));
  }
  if (rows.empty()) throw Error(source + ": no data rows");
  SizedTree out{HypothesisTree::from_parent_table(rows), {}};
  out.theta_override.resize(out.tree.size());
  for (const auto& [name, th] : thetas) out.theta_override[index(*out.tree.find(name))] = th;
  return out;
}

void write_result_json(std::ostream& out, const ResultTree& result, const HypothesisTree& tree) {
  Json j;
  j["schema_version"] = kResultSchemaVersion;
  j["variant"] = std::string(to_string(result.variant()));
  j["alpha"] = result.alpha();
  j["nodes_tested"] = result.nodes_tested();
  j["leaves_tested"] = result.leaves_tested();
  j["rejections_by_depth"] = result.rejections_by_depth();
  Json nodes = Json::array();
  for (const NodeOutcome& o : result.outcomes()) {
    Json n;
    n["id"] = index(o.id);
    n["name"] = tree.node(o.id).name;
    n["parent"] = o.parent ? Json(index(*o.parent)) : Json(nullptr);
    n["depth"] = o.depth;
    n["tested"] = o.tested;
    n["p_value"] = optional_json(o.p_value);
    n["adjusted_p"] = optional_json(o.adjusted_p);
    n["alpha_applied"] = optional_json(o.alpha_applied);
    n["rejected"] = o.rejected;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  out << j.dump(2) << '\n';
}

ResultTree read_result_json(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
    const int version = j.at("schema_version").get<int>();
    if (version != kResultSchemaVersion)
      throw Error("unsupported result schema version " + std::to_string(version));
    ResultTree result(parse_variant(j.at("variant").get<std::string>()), j.at("alpha").get<double>());
    for (const Json& n : j.at("nodes")) {
      NodeOutcome o;
      o.id = node_id(n.at("id").get<std::size_t>());
      if (!n.at("parent").is_null()) o.parent = node_id(n.at("parent").get<std::size_t>());
      o.depth = n.at("depth").get<int>();
      o.tested = n.at("tested").get<bool>();
      o.p_value = optional_double(n, "p_value");
      o.adjusted_p = optional_double(n, "adjusted_p");
      o.alpha_applied = optional_double(n, "alpha_applied");
      o.rejected = n.at("rejected").get<bool>();
      result.add(o);
    }
    result.set_leaves_tested(j.at("leaves_tested").get<std::size_t>());
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed result JSON: ") + e.what());
  }
}

void write_result_dot(std::ostream& out, const ResultTree& result, const HypothesisTree& tree,
                      DotPruned pruned) {
  out << "digraph treegate {\n";
  out << "  node [shape=ellipse, fontname=\"Helvetica\"];\n";
  for (const NodeOutcome& o : result.outcomes()) {
    const TreeNode& n = tree.node(o.id);
    std::string label = dot_escape(n.name);
    if (o.p_value) label += fmt::format("\\np = {:.4g}", *o.p_value);
    if (o.alpha_applied) label += fmt::format("\\nalpha = {:.4g}", *o.alpha_applied);
    out << "  n" << index(o.id) << " [label=\"" << label << "\"";
    if (o.rejected) out << ", style=filled, fillcolor=\"#f4a582\", penwidth=2";
    out << "];\n";
    if (o.parent) out << "  n" << index(*o.parent) << " -> n" << index(o.id) << ";\n";
    if (pruned == DotPruned::collapse && !o.rejected && !n.is_leaf()) {
      out << "  u" << index(o.id) << " [shape=box, style=dashed, label=\""
          << subtree_size(tree, o.id) - 1 << " untested\"];\n";
      out << "  n" << index(o.id) << " -> u" << index(o.id) << " [style=dashed];\n";
    }
  }
  out << "}\n";
}

void write_result_csv(std::ostream& out, const ResultTree& result, const HypothesisTree& tree) {
  out << "node_id,name,parent_id,depth,tested,p_value,adjusted_p,alpha_applied,rejected\n";
  for (const NodeOutcome& o : result.outcomes()) {
    const std::string& name = tree.node(o.id).name;
    const bool quote = name.find_first_of(",\"") != std::string::npos;
    std::string field = name;
    if (quote) {
      field.clear();
      for (char c : name) field += c == '"' ? std::string("\"\"") : std::string(1, c);
      field = "\"" + field + "\"";
    }
    out << index(o.id) << ',' << field << ','
        << (o.parent ? std::to_string(index(*o.parent)) : std::string()) << ',' << o.depth << ','
        << int{o.tested} << ',' << opt_num(o.p_value) << ',' << opt_num(o.adjusted_p) << ','
        << opt_num(o.alpha_applied) << ',' << int{o.rejected} << '\n';
  }
}

void write_schedule_csv(std::ostream& out, const AlphaSchedule& schedule) {
  out << "depth,nodes,theta_hat,exposure,error_load,alpha_adj,gating_sufficient\n";
  for (const ScheduleLevel& l : schedule.levels)
    out << fmt::format("{},{},{},{},{},{},{}\n", l.depth, l.nodes, l.theta_hat, l.exposure,
                       l.error_load, l.alpha_adj, schedule.gating_sufficient ? "true" : "false");
}

void write_weak_csv(std::ostream& out, std::span<const WeakSummary> rows) {
  out << "k,levels,nodes,leaves,replicates,fwer,fwer_se,mean_tests\n";
  for (const WeakSummary& s : rows)
    out << fmt::format("{},{},{},{},{},{},{},{}\n", s.k, s.levels, s.nodes, s.leaves, s.replicates,
                       num(s.fwer), num(s.fwer_se), num(s.mean_tests));
}

void write_strong_csv(std::ostream& out, std::span<const StrongSummary> rows) {
  if (rows.empty()) return;
  const auto& first = rows.front().methods;
  auto has = [&](std::string_view m) {
    return std::any_of(first.begin(), first.end(), [&](const MethodSummary& s) { return s.method == m; });
  };
  const bool ratio = has("TD-A-Pr") && has("BU-Hom");
  out << "k,d,null,sum_G,replicates";
  for (const MethodSummary& m : first) out << ',' << m.method;
  for (const MethodSummary& m : first) out << ',' << m.method << "_Disc";
  if (ratio) out << ",Ratio";
  out << '\n';
  for (const StrongSummary& s : rows) {
    const StrongConfig& c = s.config;
    out << c.k << ',' << (c.null_proportion < 1.0 && c.d ? num(*c.d) : std::string("---")) << ','
        << num(c.null_proportion) << ',' << fmt::format("{:.2f}", s.sum_g) << ',' << c.replicates;
    for (const MethodSummary& m : s.methods) out << ',' << num(m.fwer);
    for (const MethodSummary& m : s.methods) out << ',' << num(m.true_rejections);
    if (ratio) {
      const double bu = s.at("BU-Hom").true_rejections;
      out << ',' << (bu > 0 ? num(s.at("TD-A-Pr").true_rejections / bu) : std::string("inf"));
    }
    out << '\n';
  }
}

void write_dpp_csv(std::ostream& out, const DppSummary& summary) {
  static const std::pair<const char*, const char*> kColumns[] = {
      {"unadjusted", "3 Rules"},        {"local_hommel", "+ Loc. Hom."},
      {"local_bh", "+ Loc. BH"},        {"adaptive", "+ Adapt. alpha"},
      {"adaptive_pruned", "+ Ad. alpha Pr."},
  };
  const MethodSummary& bu = summary.at("bottom_up_hommel");
  using Field = double MethodSummary::*;
  static const std::pair<const char*, Field> kRows[] = {
      {"Nodes tested", &MethodSummary::nodes_tested},
      {"Node FWER", &MethodSummary::fwer},
      {"Node False Rej. Prop.", &MethodSummary::false_rejection_prop},
      {"Node Power", &MethodSummary::power},
      {"Leaves tested", &MethodSummary::leaves_tested},
      {"Leaf Power", &MethodSummary::leaf_power},
      {"Leaf True Rejections", &MethodSummary::leaf_true_rejections},
      {"Leaf FWER", &MethodSummary::leaf_fwer},
      {"Leaf False Rej. Prop.", &MethodSummary::leaf_false_rejection_prop},
  };
  static const std::pair<const char*, Field> kBottomUp[] = {
      {"Bottom Up Power", &MethodSummary::leaf_power},
      {"Bottom Up True Rejections", &MethodSummary::leaf_true_rejections},
      {"Bottom Up FWER", &MethodSummary::leaf_fwer},
      {"Bottom Up False Rej. Prop.", &MethodSummary::leaf_false_rejection_prop},
  };
  out << "Test Characteristic";
  for (const auto& [key, label] : kColumns) out << ',' << label;
  out << '\n';
  for (const auto& [label, field] : kRows) {
    out << label;
    for (const auto& [key, unused] : kColumns) out << ',' << fmt::format("{:.3f}", summary.at(key).*field);
    out << '\n';
  }
  for (const auto& [label, field] : kBottomUp) {
    out << label;
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << ',' << fmt::format("{:.3f}", bu.*field);
    out << '\n';
  }
}

}  // namespace treegate
