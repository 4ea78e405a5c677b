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

#ifndef TREEGATE_NORMAL_HPP_
#define TREEGATE_NORMAL_HPP_

namespace treegate {

double normal_cdf(double x);
// Inverse of normal_cdf for p in (0, 1).
double normal_quantile(double p);
// P(X >= x) for X ~ chi-square(df), df >= 1.
double chi_square_upper_tail(double x, double df);

}  // namespace treegate

#endif  // TREEGATE_NORMAL_HPP_
