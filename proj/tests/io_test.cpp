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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "treegate/commands.hpp"
#include "treegate/config.hpp"
#include "treegate/error.hpp"

namespace treegate {
namespace {

const std::string kData = TREEGATE_TEST_DATA;

std::string ErrorText(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Dataset ReadText(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in, "mem");
}

TEST(Csv, SplitsQuotedFields) {
  EXPECT_EQ(split_csv_line("a,\"b,c\",\"d\"\"e\","),
            (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
  EXPECT_THROW(split_csv_line("a,\"b"), Error);
}

TEST(Dataset, ReadsHierarchy) {
  const Dataset d = ReadText(
      "unit_id,block_id,treatment,outcome,level1\n"
      "1,b1,1,2.0,g\n2,b1,0,1.0,g\n3,b2,1,2.5,h\n4,b2,0,1.5,h\n");
  ASSERT_EQ(d.blocks.size(), 2u);
  EXPECT_EQ(d.paths[1], (std::vector<std::string>{"h"}));
  const HypothesisTree tree = dataset_tree(d);
  EXPECT_EQ(tree.size(), 5u);
  EXPECT_EQ(blocks_in_leaf_order(d, tree).front().id, "b1");
}

TEST(Dataset, ErrorsCarryLineNumbers) {
  EXPECT_NE(ErrorText([] { ReadText("unit_id,block_id,treatment,outcome\n1,b,2,1.0\n"); }).find("mem:2:"),
            std::string::npos);
  EXPECT_NE(ErrorText([] { ReadText("unit_id,block_id,treatment,outcome\n1,b,1,1.0\n1,b,0,x\n"); })
                .find("mem:3:"),
            std::string::npos);
  EXPECT_NE(ErrorText([] { ReadText("unit_id,block_id,treatment\n1,b,1\n"); }).find("outcome"),
            std::string::npos);
  EXPECT_NE(ErrorText([] { ReadText("unit_id,block_id,treatment,outcome\n1,b,1\n"); }).find("mem:2:"),
            std::string::npos);
}

TEST(Dataset, DegenerateBlockIsNamed) {
  std::ifstream in(kData + "/degenerate_block.csv");
  const std::string msg = ErrorText([&] { read_dataset(in, "x"); });
  EXPECT_NE(msg.find("B2"), std::string::npos);
  EXPECT_EQ(msg.find("B1"), std::string::npos);
}

TEST(NodeSizes, SingleNode) {
  std::istringstream in("node_id,parent_id,n_units\nroot,,200\n");
  const SizedTree s = read_node_sizes(in);
  const AlphaSchedule schedule = adaptive_schedule(s.tree, {.d_hat = 0.3});
  ASSERT_EQ(schedule.levels.size(), 1u);
  EXPECT_EQ(schedule.levels[0].alpha_adj, 0.05);
  std::ostringstream out;
  write_schedule_csv(out, schedule);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "depth,nodes,theta_hat,exposure,error_load,alpha_adj,gating_sufficient");
}

TEST(NodeSizes, Errors) {
  std::istringstream bad_units("node_id,parent_id,n_units\nroot,,-3\n");
  EXPECT_THROW(read_node_sizes(bad_units), Error);
  std::istringstream bad_theta("node_id,parent_id,n_units,theta_hat\nroot,,10,1.5\n");
  EXPECT_THROW(read_node_sizes(bad_theta), Error);
}

ResultTree SmallResult(const HypothesisTree& tree) {
  const std::vector<double> p = {0.001, 0.01, 0.2, 0.9, 0.03, 0.5, 0.7};
  return run_topdown(
      tree, [&](NodeId id) -> std::optional<double> { return index(id) < p.size() ? p[index(id)] : 0.5; },
      GateVariant::local_hommel, nullptr, 0.05);
}

TEST(ResultJson, RoundTrip) {
  const HypothesisTree tree = HypothesisTree::regular(3, 3, 1);
  const ResultTree r = SmallResult(tree);
  std::stringstream s;
  write_result_json(s, r, tree);
  EXPECT_NE(s.str().find("\"schema_version\": 1"), std::string::npos);
  EXPECT_EQ(read_result_json(s), r);
  std::istringstream wrong("{\"schema_version\": 7}");
  EXPECT_THROW(read_result_json(wrong), Error);
  std::istringstream junk("not json");
  EXPECT_THROW(read_result_json(junk), Error);
}

// Accepts only the statements write_result_dot is allowed to emit and checks
// that every edge joins declared vertices.
void CheckDot(const std::string& text, std::size_t* vertices, std::size_t* collapsed) {
  static const std::regex header(R"(digraph treegate \{)");
  static const std::regex defaults(R"(  node \[[^\]]*\];)");
  static const std::regex vertex(R"(  ([nu]\d+) \[(.*)\];)");
  static const std::regex edge(R"(  ([nu]\d+) -> ([nu]\d+)( \[style=dashed\])?;)");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  ASSERT_TRUE(std::regex_match(line, header)) << line;
  std::set<std::string> declared;
  std::vector<std::pair<std::string, std::string>> edges;
  bool closed = false;
  *vertices = *collapsed = 0;
  while (std::getline(in, line)) {
    ASSERT_FALSE(closed) << "content after closing brace";
    std::smatch m;
    if (line == "}") {
      closed = true;
    } else if (std::regex_match(line, m, edge)) {
      edges.emplace_back(m[1], m[2]);
    } else if (std::regex_match(line, m, vertex)) {
      ASSERT_TRUE(declared.insert(m[1]).second) << line;
      ++*vertices;
      *collapsed += m[1].str()[0] == 'u';
    } else {
      ASSERT_TRUE(std::regex_match(line, defaults)) << line;
    }
  }
  EXPECT_TRUE(closed);
  for (const auto& [a, b] : edges) {
    EXPECT_TRUE(declared.count(a)) << a;
    EXPECT_TRUE(declared.count(b)) << b;
  }
}

TEST(ResultDot, Grammar) {
  const HypothesisTree tree = HypothesisTree::regular(3, 3, 1);
  const ResultTree r = SmallResult(tree);
  std::size_t vertices = 0, collapsed = 0;
  std::ostringstream omit;
  write_result_dot(omit, r, tree, DotPruned::omit);
  CheckDot(omit.str(), &vertices, &collapsed);
  EXPECT_EQ(vertices, r.nodes_tested());
  EXPECT_EQ(collapsed, 0u);
  std::ostringstream collapse;
  write_result_dot(collapse, r, tree, DotPruned::collapse);
  CheckDot(collapse.str(), &vertices, &collapsed);
  EXPECT_EQ(collapsed, 2u);  // nodes 3 and 4 stand for their three children each
  EXPECT_NE(collapse.str().find("3 untested"), std::string::npos);
}

TEST(ResultCsv, OneRowPerTestedNode) {
  const HypothesisTree tree = HypothesisTree::regular(3, 3, 1);
  const ResultTree r = SmallResult(tree);
  std::ostringstream out;
  write_result_csv(out, r, tree);
  const std::string text = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), r.nodes_tested() + 1);
}

TEST(Config, UnknownKeysAndTypes) {
  std::istringstream in("# comment\nk = 2, 4\nkk = 2\nalpha = 0.05\n");
  const KeyValueConfig c = KeyValueConfig::parse(in, "cfg");
  const std::vector<std::string_view> allowed = {"k", "alpha"};
  const std::string msg = ErrorText([&] { c.check_keys(allowed); });
  EXPECT_NE(msg.find("unknown keys: kk"), std::string::npos) << msg;
  EXPECT_EQ(c.get_ints("k", {}), (std::vector<long long>{2, 4}));
  EXPECT_DOUBLE_EQ(c.get_double("alpha", 0.1), 0.05);
  EXPECT_EQ(c.get_int("missing", 9), 9);
  EXPECT_THROW(c.get_double("k", 0.0), Error);
  std::istringstream dup("a = 1\na = 2\n");
  EXPECT_THROW(KeyValueConfig::parse(dup), Error);
}

TEST(Config, ScenarioGrids) {
  std::istringstream weak("k = 2, 4\nlevels = 6, 4\nreplicates = 100\n");
  const auto w = weak_configs(KeyValueConfig::parse(weak));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[1].k, 4);
  EXPECT_EQ(w[1].levels, 4);
  std::istringstream strong("k = 2, 4\nd = 0.1, 0.15\nnull = 0.8, 1\n");
  EXPECT_EQ(strong_configs(KeyValueConfig::parse(strong)).size(), 6u);
}

TEST(Commands, AdaptiveNeedsDHat) {
  TestOptions o;
  o.data_path = kData + "/small_study.csv";
  o.variant = GateVariant::adaptive;
  std::ostringstream out;
  EXPECT_THROW(cmd_test(o, out), UsageError);
  o.format = "xml";
  o.d_hat = 0.3;
  EXPECT_THROW(cmd_test(o, out), UsageError);
}

TEST(Commands, TestOutputIsReproducible) {
  TestOptions o;
  o.data_path = kData + "/small_study.csv";
  o.n_perms = 400;
  o.seed = 11;
  for (GateVariant v : {GateVariant::unadjusted, GateVariant::local_hommel, GateVariant::adaptive_pruned}) {
    o.variant = v;
    o.d_hat = 0.5;
    std::ostringstream a, b;
    cmd_test(o, a);
    cmd_test(o, b);
    EXPECT_EQ(a.str(), b.str());
    std::istringstream in(a.str());
    EXPECT_GE(read_result_json(in).nodes_tested(), 1u);
  }
}

TEST(Commands, AlphaScheduleFixture) {
  ScheduleOptions o;
  o.sizes_path = kData + "/schedule_k2_L3.csv";
  o.d_hat = 0.1;
  std::ostringstream out;
  cmd_alpha_schedule(o, out);
  EXPECT_NE(out.str().find("3,4,"), std::string::npos);
  EXPECT_NE(out.str().find(",0.025,"), std::string::npos);
}

}  // namespace
}  // namespace treegate
