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

#ifndef TREEGATE_ERROR_HPP_
#define TREEGATE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace treegate {

// Thrown for invalid inputs: bad arguments, malformed files, degenerate data.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace treegate

#endif  // TREEGATE_ERROR_HPP_
