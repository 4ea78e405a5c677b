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


#include <algorithm>
#include <cmath>
#include <vector>

#include "treegate/error.hpp"
#include "treegate/errorload.hpp"
#include "treegate/parallel.hpp"
#include "treegate/sim.hpp"

namespace treegate {

namespace {

constexpr double kPlaceholderDHat = 0.10;

enum class StrongMethod { td, td_hom, td_adp, td_a_h, td_a_pr, bu_hom, bu_bh };

struct MethodEntry {
  StrongMethod method;
  const char* name;
};

constexpr MethodEntry kMethods[] = {
    {StrongMethod::td, "TD"},           {StrongMethod::td_hom, "TD-Hom"},
    {StrongMethod::td_adp, "TD-Adp"},   {StrongMethod::td_a_h, "TD-A-H"},
    {StrongMethod::td_a_pr, "TD-A-Pr"}, {StrongMethod::bu_hom, "BU-Hom"},
    {StrongMethod::bu_bh, "BU-BH"},
};

GateVariant gate_variant(StrongMethod m) {
  switch (m) {
    case StrongMethod::td: return GateVariant::unadjusted;
    case StrongMethod::td_hom: return GateVariant::local_hommel;
    case StrongMethod::td_adp: return GateVariant::adaptive;
    case StrongMethod::td_a_h: return GateVariant::adaptive_hommel;
    default: return GateVariant::adaptive_pruned;
  }
}

std::vector<StrongMethod> selected_methods(const StrongConfig& config) {
  std::vector<StrongMethod> out;
  if (config.methods.empty()) {
    for (const MethodEntry& e : kMethods) out.push_back(e.method);
    return out;
  }
  for (const std::string& name : config.methods) {
    const auto it = std::find_if(std::begin(kMethods), std::end(kMethods),
                                 [&](const MethodEntry& e) { return name == e.name; });
    if (it == std::end(kMethods)) throw Error("unknown method '" + name + "'");
    if (std::find(out.begin(), out.end(), it->method) != out.end())
      throw Error("method '" + name + "' listed twice");
    out.push_back(it->method);
  }
  return out;
}

const char* method_name(StrongMethod m) {
  for (const MethodEntry& e : kMethods)
    if (e.method == m) return e.name;
  return "?";
}

void validate(const StrongConfig& c) {
  if (c.replicates < 100) throw Error("strong simulation needs at least 100 replicates");
  if (!(c.null_proportion >= 0.0 && c.null_proportion <= 1.0))
    throw Error("null proportion must lie in [0, 1]");
  if (!(c.alpha > 0.0 && c.alpha < 0.5)) throw Error("alpha must lie in (0, 0.5)");
  if (c.null_proportion < 1.0 && !c.d) throw Error("effect size d is required when some hypotheses are non-null");
  if (c.d && !(*c.d >= 0.0)) throw Error("effect size d must be non-negative");
}

}  // namespace

double calibrate_beta_shape(double target_power, double alpha) {
  if (!(target_power > 0.0 && target_power < 1.0))
    throw Error("target power must lie strictly between 0 and 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie strictly between 0 and 1");
  return std::log(target_power) / std::log(alpha);
}

double draw_beta_a1(double a, Rng& rng) { return std::pow(uniform01(rng), 1.0 / a); }

const std::vector<std::string>& strong_method_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const MethodEntry& e : kMethods) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

const MethodSummary& StrongSummary::at(std::string_view method) const {
  for (const MethodSummary& m : methods)
    if (m.method == method) return m;
  throw Error("method '" + std::string(method) + "' was not simulated");
}

HypothesisTree strong_tree(const StrongConfig& c) {
  validate(c);
  if (c.k < 2 || c.levels < 2) throw Error("strong tree needs k >= 2 and at least 2 levels");
  const auto leaves = static_cast<std::int64_t>(std::pow(c.k, c.levels - 1));
  if (c.n_total % leaves != 0 || c.n_total / leaves < 2)
    throw Error("n_total must split evenly into at least 2 units per leaf");
  const HypothesisTree tree = HypothesisTree::regular(c.k, c.levels, c.n_total / leaves);

  const auto n_leaves = static_cast<std::size_t>(leaves);
  const auto non_null = static_cast<std::size_t>(
      std::llround((1.0 - c.null_proportion) * static_cast<double>(n_leaves)));
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < non_null; ++i) {
    if (c.placement == Placement::contiguous)
      positions.push_back(i);
    else
      positions.push_back(static_cast<std::size_t>(std::llround(
          static_cast<double>(i) * static_cast<double>(n_leaves) / static_cast<double>(non_null))));
  }
  return tree.with_truth_by_leaf(positions);
}

StrongSummary simulate_strong(const StrongConfig& config) {
  const std::vector<StrongMethod> methods = selected_methods(config);
  const HypothesisTree tree = strong_tree(config);

  // Beta shape per non-null node; nullopt draws uniform.
  std::vector<std::optional<double>> shape(tree.size());
  std::size_t non_null_leaves = 0;
  for (const TreeNode& n : tree.nodes()) {
    if (*n.is_null) continue;
    double d = *config.d;
    if (config.attenuate) {
      std::size_t hit = 0;
      for (NodeId leaf : tree.leaves_under(n.id)) hit += !*tree.node(leaf).is_null;
      d *= static_cast<double>(hit) / static_cast<double>(n.n_blocks());
    }
    const double theta = power_normal_approx({.d_hat = d, .alpha = config.alpha},
                                             static_cast<double>(n.n_units));
    // Power that rounds to 1 still needs a finite shape.
    shape[index(n.id)] = calibrate_beta_shape(std::min(theta, 1.0 - 1e-12), config.alpha);
    non_null_leaves += n.is_leaf();
  }

  const double d_hat = config.d_hat ? *config.d_hat
                       : config.null_proportion < 1.0 ? *config.d
                                                      : kPlaceholderDHat;
  const AlphaSchedule schedule = adaptive_schedule(tree, {.d_hat = d_hat, .alpha = config.alpha});

  std::vector<std::vector<RunMetrics>> runs(config.replicates,
                                            std::vector<RunMetrics>(methods.size()));
  parallel_for(config.replicates, [&](std::size_t r) {
    Rng rng = make_rng(config.seed, r);
    // Every top-down method sees the same node p-values within a replicate.
    std::vector<double> p(tree.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = shape[i] ? draw_beta_a1(*shape[i], rng) : uniform01(rng);
    const PValueSource source = [&p](NodeId id) -> std::optional<double> { return p[index(id)]; };
    std::vector<double> leaf_p;
    leaf_p.reserve(tree.leaves().size());
    for (NodeId leaf : tree.leaves()) leaf_p.push_back(p[index(leaf)]);

    for (std::size_t m = 0; m < methods.size(); ++m) {
      const StrongMethod method = methods[m];
      if (method == StrongMethod::bu_hom || method == StrongMethod::bu_bh) {
        const BottomUpResult bu = run_bottom_up(
            leaf_p, method == StrongMethod::bu_hom ? BottomUpMethod::bu_hommel : BottomUpMethod::bu_bh,
            config.alpha);
        runs[r][m] = score_bottom_up(bu.rejected, tree);
      } else {
        const ResultTree result =
            run_topdown(tree, source, gate_variant(method), &schedule, config.alpha);
        runs[r][m] = score_result(result, tree);
      }
    }
  });

  StrongSummary s;
  s.config = config;
  s.sum_g = schedule.total_load;
  s.non_null_leaves = non_null_leaves;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MetricsAccumulator acc;
    for (const auto& run : runs) acc.add(run[m]);
    s.methods.push_back(acc.summary(method_name(methods[m])));
  }
  return s;
}

}  // namespace treegate
