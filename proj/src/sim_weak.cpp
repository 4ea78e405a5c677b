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


#include <vector>

#include "treegate/error.hpp"
#include "treegate/parallel.hpp"
#include "treegate/sim.hpp"

namespace treegate {

WeakSummary simulate_weak(const WeakConfig& config) {
  if (config.replicates < 100) throw Error("weak simulation needs at least 100 replicates");
  if (!(config.alpha >= 0.0 && config.alpha < 1.0)) throw Error("alpha must lie in [0, 1)");
  const HypothesisTree tree = HypothesisTree::regular(config.k, config.levels, 1);

  struct Run {
    bool false_rejection = false;
    std::size_t tests = 0;
  };
  std::vector<Run> runs(config.replicates);
  parallel_for(config.replicates, [&](std::size_t r) {
    Rng rng = make_rng(config.seed, r);
    // Drawn lazily, so only the nodes the gate reaches consume randomness.
    const PValueSource source = [&rng](NodeId) -> std::optional<double> { return uniform01(rng); };
    const ResultTree result = run_topdown(tree, source, GateVariant::unadjusted, nullptr, config.alpha);
    runs[r] = {result.rejections() > 0, result.nodes_tested()};
  });

  WeakSummary s;
  s.k = config.k;
  s.levels = config.levels;
  s.nodes = tree.size();
  s.leaves = tree.leaves().size();
  s.replicates = config.replicates;
  double fwer = 0.0;
  double tests = 0.0;
  for (const Run& run : runs) {
    fwer += run.false_rejection;
    tests += static_cast<double>(run.tests);
  }
  s.fwer = fwer / static_cast<double>(runs.size());
  s.fwer_se = binomial_se(s.fwer, runs.size());
  s.mean_tests = tests / static_cast<double>(runs.size());
  return s;
}

}  // namespace treegate
