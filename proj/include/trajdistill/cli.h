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

// The trajdistill command line. Every subcommand reads and writes files in
// one output directory:
//
//   train.dataset.jsonl, eval.dataset.jsonl   gen-data
//   teacher_NN.ckpt.jsonl                     train-teachers
//   targets.jsonl                             build-targets
//   student.ckpt.jsonl, student_loss.csv      distill
//   <name>.report.jsonl                       eval
//   sweep_temperature.csv, sweep_ensemble.csv, compare_loss.csv
//
// Failures print one JSON line {"error": <kind>, "message": ...} to the error
// stream and return the matching ExitCode.

#ifndef TRAJDISTILL_CLI_H_
#define TRAJDISTILL_CLI_H_

#include <ostream>

namespace trajdistill {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace trajdistill

#endif  // TRAJDISTILL_CLI_H_
