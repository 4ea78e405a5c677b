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

#ifndef TREEGATE_RNG_HPP_
#define TREEGATE_RNG_HPP_

#include <cstdint>
#include <random>

namespace treegate {

using Rng = std::mt19937_64;

// Independent stream keyed by (seed, stream, substream), e.g. (scenario seed,
// replicate, node). Results never depend on which thread draws them.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Rng(seq);
}

// Uniform on (0, 1); never returns exactly 0.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace treegate

#endif  // TREEGATE_RNG_HPP_
