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


// Replicate-level parallelism. Work is split across a fixed worker count and
// every result lands in a slot indexed by replicate, so reductions happen in
// replicate order no matter how the threads were scheduled.

#ifndef TREEGATE_PARALLEL_HPP_
#define TREEGATE_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace treegate {

// TREEGATE_THREADS if set to a positive integer, else the hardware count.
std::size_t worker_count();

// Calls body(i) for i in [0, n). The first exception thrown by any call is
// rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace treegate

#endif  // TREEGATE_PARALLEL_HPP_
