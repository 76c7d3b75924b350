// Copyright 2026 The trajdistill Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJDISTILL_ERRORS_H_
#define TRAJDISTILL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace trajdistill {

// Contract violations on values (bad weights, mismatched horizons, ...) are
// reported with std::invalid_argument. The two types below cover the other
// failure classes the command line distinguishes.

// Malformed or incompatible file contents.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, int line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Non-finite loss or parameters during optimization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajdistill

#endif  // TRAJDISTILL_ERRORS_H_
