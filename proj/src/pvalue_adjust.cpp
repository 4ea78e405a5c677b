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

#include "treegate/pvalue_adjust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treegate/error.hpp"

namespace treegate {

namespace {

std::vector<std::size_t> ascending_order(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return order;
}

}  // namespace

void validate_pvalues(std::span<const double> p) {
  if (p.empty()) throw Error("p-value vector is empty");
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw Error("p-value outside [0, 1]: " + std::to_string(v));
  }
}

std::vector<double> adjust_bonferroni(std::span<const double> p) {
  validate_pvalues(p);
  const double m = static_cast<double>(p.size());
  std::vector<double> out(p.size());
  std::transform(p.begin(), p.end(), out.begin(), [m](double v) { return std::min(1.0, m * v); });
  return out;
}

std::vector<double> adjust_hommel(std::span<const double> p) {
  validate_pvalues(p);
  const std::size_t n = p.size();
  if (n == 1) return {p[0]};

  const std::vector<std::size_t> order = ascending_order(p);
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = p[order[i]];

  // Simes over the full set of size n seeds every entry.
  double simes_all = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    simes_all = std::min(simes_all, static_cast<double>(n) * sorted[i] / static_cast<double>(i + 1));
  std::vector<double> adjusted(n, simes_all);
  std::vector<double> q(n, simes_all);

  // For each subset size m, the worst Simes p over sets of size m containing
  // hypothesis i: the m-1 largest others plus i itself.
  for (std::size_t m = n - 1; m >= 2; --m) {
    const std::size_t split = n - m + 1;  // sorted[0 .. split) are candidates for rank 1
    double tail = 1.0;
    for (std::size_t j = split; j < n; ++j) {
      const std::size_t rank = j - split + 2;
      tail = std::min(tail, static_cast<double>(m) * sorted[j] / static_cast<double>(rank));
    }
    for (std::size_t j = 0; j < split; ++j)
      q[j] = std::min(static_cast<double>(m) * sorted[j] / 1.0, tail);
    for (std::size_t j = split; j < n; ++j) q[j] = q[split - 1];
    for (std::size_t j = 0; j < n; ++j) adjusted[j] = std::max(adjusted[j], q[j]);
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[order[i]] = std::min(1.0, std::max(adjusted[i], sorted[i]));
  return out;
}

std::vector<double> adjust_bh(std::span<const double> p) {
  validate_pvalues(p);
  const std::size_t n = p.size();
  const std::vector<std::size_t> order = ascending_order(p);
  std::vector<double> out(n);
  double running = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    // The max guards against rounding below p at the largest rank.
    const double v = std::max(p[order[i]], static_cast<double>(n) * p[order[i]] / static_cast<double>(i + 1));
    running = std::min(running, v);
    out[order[i]] = std::min(1.0, running);
  }
  return out;
}

double family_error_rate(double alpha, int m) {
  if (m < 1) throw Error("family size must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must be in (0, 1)");
  return -std::expm1(m * std::log1p(-alpha));
}

}  // namespace treegate
