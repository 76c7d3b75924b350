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

// Line-delimited JSON files. Every file starts with a header record
//   {"format": <kind>, "version": 1, "records": <count>, "config": {...}}
// followed by exactly `records` lines, one record each. Reals are written in
// shortest round-trip form, so reading back a written file reproduces every
// value bit for bit.

#ifndef TRAJDISTILL_DATA_IO_H_
#define TRAJDISTILL_DATA_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "trajdistill/gmm.h"
#include "trajdistill/metrics.h"
#include "trajdistill/model.h"
#include "trajdistill/scenario.h"

namespace trajdistill {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kDatasetFormat = "trajdistill.dataset";
inline constexpr std::string_view kTargetsFormat = "trajdistill.targets";
inline constexpr std::string_view kCheckpointFormat = "trajdistill.checkpoint";
inline constexpr std::string_view kReportFormat = "trajdistill.report";

struct RecordFile {
  nlohmann::json config;
  std::vector<nlohmann::json> records;
};

// Writes `contents` to a sibling temporary file and renames it over `path`.
void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view contents);

void WriteRecordFile(const std::filesystem::path& path,
                     std::string_view format, const nlohmann::json& config,
                     const std::vector<nlohmann::json>& records);

// Throws FormatError naming the offending line for unparsable lines, a wrong
// format or version, or a record count that disagrees with the header.
RecordFile ReadRecordFile(const std::filesystem::path& path,
                          std::string_view format);

nlohmann::json ExampleToJson(const AgentExample& ex);
AgentExample ExampleFromJson(const nlohmann::json& j);
nlohmann::json PredictionToJson(const GmmPrediction& pred);
GmmPrediction PredictionFromJson(const nlohmann::json& j);
nlohmann::json ReportToJson(const MetricsReport& report);
MetricsReport ReportFromJson(const nlohmann::json& j);
nlohmann::json ScenarioConfigToJson(const ScenarioGenConfig& cfg);
ScenarioGenConfig ScenarioConfigFromJson(const nlohmann::json& j);

struct Dataset {
  nlohmann::json config;
  std::vector<AgentExample> examples;
};

void WriteDataset(const std::filesystem::path& path,
                  const std::vector<AgentExample>& examples,
                  const nlohmann::json& config);
Dataset ReadDataset(const std::filesystem::path& path);

// Teacher targets (or any per-example predictions), aligned with a dataset
// by example id.
struct TargetCache {
  nlohmann::json config;
  std::vector<int64_t> example_ids;
  std::vector<GmmPrediction> predictions;
};

void WriteTargets(const std::filesystem::path& path,
                  const std::vector<int64_t>& example_ids,
                  const std::vector<GmmPrediction>& predictions,
                  const nlohmann::json& config);
TargetCache ReadTargets(const std::filesystem::path& path);

struct Checkpoint {
  nlohmann::json config;
  StudentModel model;
  int64_t steps = 0;
};

void WriteCheckpoint(const std::filesystem::path& path,
                     const StudentModel& model, int64_t steps,
                     const nlohmann::json& config);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

void WriteReport(const std::filesystem::path& path,
                 const MetricsReport& report, const nlohmann::json& config);
MetricsReport ReadReport(const std::filesystem::path& path);

}  // namespace trajdistill

#endif  // TRAJDISTILL_DATA_IO_H_
