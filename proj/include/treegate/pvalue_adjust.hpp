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

// Classical multiplicity adjustments. Inputs must be non-empty, finite and in
// [0, 1]; outputs are index-aligned with the inputs and clamped to 1. Ties
// are ordered by (value, original index).

#ifndef TREEGATE_PVALUE_ADJUST_HPP_
#define TREEGATE_PVALUE_ADJUST_HPP_

#include <span>
#include <vector>

namespace treegate {

std::vector<double> adjust_bonferroni(std::span<const double> p);

// Hommel (1988) step-up adjustment; equal to the closed-testing procedure
// with Simes local tests.
std::vector<double> adjust_hommel(std::span<const double> p);

// Benjamini-Hochberg step-up adjustment.
std::vector<double> adjust_bh(std::span<const double> p);

// 1 - (1 - alpha)^m for m independent level-alpha tests.
double family_error_rate(double alpha, int m);

// Throws Error unless p is a valid p-value vector.
void validate_pvalues(std::span<const double> p);

}  // namespace treegate

#endif  // TREEGATE_PVALUE_ADJUST_HPP_
