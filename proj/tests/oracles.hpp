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


// Brute-force reference implementations used to check the library. They are
// written for clarity rather than speed and share no code with src/.

#ifndef TREEGATE_TESTS_ORACLES_HPP_
#define TREEGATE_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace treegate::testing {

// Simes p-value of a subset: min over j of |S| p_(j) / j.
inline double simes(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double m = static_cast<double>(p.size());
  double best = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    best = std::min(best, m * p[j] / static_cast<double>(j + 1));
  return best;
}

// Closed testing with Simes local tests: adjusted p_i is the largest Simes
// p-value over all subsets containing i.
inline std::vector<double> closed_testing_simes(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<double> adjusted(m, 0.0);
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<double> subset;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) subset.push_back(p[i]);
    const double s = simes(subset);
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) adjusted[i] = std::max(adjusted[i], s);
  }
  for (double& a : adjusted) a = std::min(a, 1.0);
  return adjusted;
}

// Step-up BH by direct definition: adjusted p_i = min over j >= rank(i) of
// m p_(j) / j.
inline std::vector<double> bh_by_definition(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    double best = 1.0;
    for (std::size_t j = r; j < m; ++j)
      best = std::min(best, static_cast<double>(m) * p[order[j]] / static_cast<double>(j + 1));
    out[order[r]] = best;
  }
  return out;
}

// All assignments of m treated among n units, as 0/1 vectors.
inline std::vector<std::vector<std::uint8_t>> all_assignments(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::uint8_t>> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::uint8_t> z(n);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += z[i] = (mask >> i) & 1u;
    if (count == m) out.push_back(z);
  }
  return out;
}

}  // namespace treegate::testing

#endif  // TREEGATE_TESTS_ORACLES_HPP_
