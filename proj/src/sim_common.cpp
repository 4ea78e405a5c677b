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


#include <cmath>

#include "treegate/error.hpp"
#include "treegate/sim.hpp"

namespace treegate {

void MetricsAccumulator::add(const RunMetrics& m) {
  ++n_;
  fwer_ += m.node_false_rejection;
  leaf_fwer_ += m.leaf_false_rejection;
  frp_ += m.false_rejection_prop;
  leaf_frp_ += m.leaf_false_rejection_prop;
  power_ += m.power;
  leaf_power_ += m.leaf_power;
  true_ += static_cast<double>(m.true_rejections);
  leaf_true_ += static_cast<double>(m.leaf_true_rejections);
  nodes_ += static_cast<double>(m.nodes_tested);
  leaves_ += static_cast<double>(m.leaves_tested);
}

MethodSummary MetricsAccumulator::summary(std::string method) const {
  if (n_ == 0) throw Error("no replicates to summarize");
  const double n = static_cast<double>(n_);
  MethodSummary s;
  s.method = std::move(method);
  s.replicates = n_;
  s.fwer = fwer_ / n;
  s.fwer_se = binomial_se(s.fwer, n_);
  s.leaf_fwer = leaf_fwer_ / n;
  s.leaf_fwer_se = binomial_se(s.leaf_fwer, n_);
  s.false_rejection_prop = frp_ / n;
  s.leaf_false_rejection_prop = leaf_frp_ / n;
  s.power = power_ / n;
  s.leaf_power = leaf_power_ / n;
  s.true_rejections = true_ / n;
  s.leaf_true_rejections = leaf_true_ / n;
  s.nodes_tested = nodes_ / n;
  s.leaves_tested = leaves_ / n;
  return s;
}

double binomial_se(double p, std::size_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace treegate
