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

#include "trajdistill/data_io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "trajdistill/errors.h"

namespace trajdistill {
namespace {

using nlohmann::json;

json TrajectoryToJson(const Trajectory& traj) {
  json out = json::array();
  for (Vec2 p : traj) out.push_back({p.x, p.y});
  return out;
}

Trajectory TrajectoryFromJson(const json& j) {
  Trajectory out;
  out.reserve(j.size());
  for (const json& p : j) {
    if (!p.is_array() || p.size() != 2) {
      throw std::invalid_argument("expected [x, y] pair");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

std::string ReadWholeFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void WriteFileAtomically(const std::filesystem::path& path,
                         std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw std::runtime_error("cannot rename " + tmp.string() + ": " +
                             ec.message());
  }
}

void WriteRecordFile(const std::filesystem::path& path,
                     std::string_view format, const json& config,
                     const std::vector<json>& records) {
  json header = {{"format", format},
                 {"version", kFormatVersion},
                 {"records", records.size()},
                 {"config", config}};
  std::string text = header.dump();
  text += '\n';
  for (const json& r : records) {
    text += r.dump();
    text += '\n';
  }
  WriteFileAtomically(path, text);
}

RecordFile ReadRecordFile(const std::filesystem::path& path,
                          std::string_view format) {
  const std::string name = path.string();
  const std::string text = ReadWholeFile(path);
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  auto parse = [&](const std::string& s) {
    try {
      return json::parse(s);
    } catch (const json::parse_error& e) {
      throw FormatError(name, line_no, std::string("malformed record: ") +
                                           e.what());
    }
  };

  if (!std::getline(lines, line)) {
    throw FormatError(name, 1, "missing header line");
  }
  line_no = 1;
  const json header = parse(line);
  if (!header.is_object() || !header.contains("format") ||
      !header.contains("version") || !header.contains("records")) {
    throw FormatError(name, 1, "invalid header");
  }
  if (header["format"] != format) {
    throw FormatError(name, 1,
                      "expected format " + std::string(format) + ", found " +
                          header["format"].dump());
  }
  if (header["version"] != kFormatVersion) {
    throw FormatError(name, 1,
                      "unsupported format version " +
                          header["version"].dump() + " (expected " +
                          std::to_string(kFormatVersion) + ")");
  }
  const size_t expected = header["records"].get<size_t>();
  RecordFile out;
  out.config = header.value("config", json::object());
  out.records.reserve(expected);
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) {
      throw FormatError(name, line_no, "empty line");
    }
    out.records.push_back(parse(line));
  }
  if (out.records.size() != expected) {
    throw FormatError(name, line_no + 1,
                      "truncated file: header promises " +
                          std::to_string(expected) + " records, found " +
                          std::to_string(out.records.size()));
  }
  if (!text.empty() && text.back() != '\n') {
    throw FormatError(name, line_no, "truncated final line");
  }
  return out;
}

json ExampleToJson(const AgentExample& ex) {
  json others = json::array();
  for (const Trajectory& t : ex.other_agents) {
    others.push_back(TrajectoryToJson(t));
  }
  return {{"id", ex.example_id},
          {"scene", ex.scene_id},
          {"bucket", ManeuverName(ex.bucket)},
          {"features", ex.features},
          {"history", TrajectoryToJson(ex.history)},
          {"future", TrajectoryToJson(ex.gt_future)},
          {"others", others}};
}

AgentExample ExampleFromJson(const json& j) {
  AgentExample ex;
  ex.example_id = j.at("id").get<int64_t>();
  ex.scene_id = j.at("scene").get<int64_t>();
  const auto bucket = ParseManeuver(j.at("bucket").get<std::string>());
  if (!bucket) throw std::invalid_argument("unknown maneuver bucket");
  ex.bucket = *bucket;
  ex.features = j.at("features").get<std::vector<double>>();
  ex.history = TrajectoryFromJson(j.at("history"));
  ex.gt_future = TrajectoryFromJson(j.at("future"));
  for (const json& t : j.at("others")) {
    ex.other_agents.push_back(TrajectoryFromJson(t));
  }
  return ex;
}

json PredictionToJson(const GmmPrediction& pred) {
  json modes = json::array();
  for (const GaussianMode& m : pred.modes) {
    modes.push_back({{"weight", m.weight},
                     {"means", TrajectoryToJson(m.means)},
                     {"stds", TrajectoryToJson(m.stds)}});
  }
  return modes;
}

GmmPrediction PredictionFromJson(const json& j) {
  GmmPrediction pred;
  for (const json& m : j) {
    pred.modes.push_back({m.at("weight").get<double>(),
                          TrajectoryFromJson(m.at("means")),
                          TrajectoryFromJson(m.at("stds"))});
  }
  return pred;
}

json ReportToJson(const MetricsReport& r) {
  return {{"min_ade", r.min_ade},
          {"min_fde", r.min_fde},
          {"miss_rate", r.miss_rate},
          {"map", r.map},
          {"soft_map", r.soft_map},
          {"overlap", r.overlap},
          {"brier_min_fde", r.brier_min_fde},
          {"num_examples", r.num_examples}};
}

MetricsReport ReportFromJson(const json& j) {
  MetricsReport r;
  r.min_ade = j.at("min_ade").get<double>();
  r.min_fde = j.at("min_fde").get<double>();
  r.miss_rate = j.at("miss_rate").get<double>();
  r.map = j.at("map").get<double>();
  r.soft_map = j.at("soft_map").get<double>();
  r.overlap = j.at("overlap").get<double>();
  r.brier_min_fde = j.at("brier_min_fde").get<double>();
  r.num_examples = j.at("num_examples").get<int>();
  return r;
}

json ScenarioConfigToJson(const ScenarioGenConfig& cfg) {
  return {{"example_count", cfg.example_count},
          {"horizon", cfg.horizon},
          {"history", cfg.history},
          {"dt", cfg.dt},
          {"maneuver_priors", cfg.maneuver_priors},
          {"noise_std", cfg.noise_std},
          {"maneuver_variants", cfg.maneuver_variants},
          {"min_speed", cfg.min_speed},
          {"max_speed", cfg.max_speed},
          {"other_agents", cfg.other_agents},
          {"seed", cfg.seed}};
}

ScenarioGenConfig ScenarioConfigFromJson(const json& j) {
  ScenarioGenConfig cfg;
  cfg.example_count = j.value("example_count", cfg.example_count);
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.history = j.value("history", cfg.history);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.maneuver_priors = j.value("maneuver_priors", cfg.maneuver_priors);
  cfg.noise_std = j.value("noise_std", cfg.noise_std);
  cfg.maneuver_variants =
      j.value("maneuver_variants", cfg.maneuver_variants);
  cfg.min_speed = j.value("min_speed", cfg.min_speed);
  cfg.max_speed = j.value("max_speed", cfg.max_speed);
  cfg.other_agents = j.value("other_agents", cfg.other_agents);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

void WriteDataset(const std::filesystem::path& path,
                  const std::vector<AgentExample>& examples,
                  const json& config) {
  std::vector<json> records;
  records.reserve(examples.size());
  for (const AgentExample& ex : examples) records.push_back(ExampleToJson(ex));
  WriteRecordFile(path, kDatasetFormat, config, records);
}

namespace {

// Converts record-level decoding failures into FormatError with the line
// number (records start on line 2).
template <typename Fn>
auto DecodeRecord(const std::filesystem::path& path, size_t index, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(path.string(), static_cast<int>(index) + 2,
                      std::string("invalid record: ") + e.what());
  }
}

}  // namespace

Dataset ReadDataset(const std::filesystem::path& path) {
  RecordFile file = ReadRecordFile(path, kDatasetFormat);
  Dataset out;
  out.config = std::move(file.config);
  out.examples.reserve(file.records.size());
  for (size_t i = 0; i < file.records.size(); ++i) {
    out.examples.push_back(
        DecodeRecord(path, i, [&] { return ExampleFromJson(file.records[i]); }));
  }
  return out;
}

void WriteTargets(const std::filesystem::path& path,
                  const std::vector<int64_t>& example_ids,
                  const std::vector<GmmPrediction>& predictions,
                  const json& config) {
  if (example_ids.size() != predictions.size()) {
    throw std::invalid_argument("one example id per prediction required");
  }
  std::vector<json> records;
  records.reserve(predictions.size());
  for (size_t i = 0; i < predictions.size(); ++i) {
    records.push_back(
        {{"id", example_ids[i]}, {"modes", PredictionToJson(predictions[i])}});
  }
  WriteRecordFile(path, kTargetsFormat, config, records);
}

TargetCache ReadTargets(const std::filesystem::path& path) {
  RecordFile file = ReadRecordFile(path, kTargetsFormat);
  TargetCache out;
  out.config = std::move(file.config);
  for (size_t i = 0; i < file.records.size(); ++i) {
    DecodeRecord(path, i, [&] {
      const json& r = file.records[i];
      out.example_ids.push_back(r.at("id").get<int64_t>());
      GmmPrediction pred = PredictionFromJson(r.at("modes"));
      // Checked only: renormalizing would break the bit-exact round trip.
      Validate(pred);
      out.predictions.push_back(std::move(pred));
      return 0;
    });
  }
  return out;
}

void WriteCheckpoint(const std::filesystem::path& path,
                     const StudentModel& model, int64_t steps,
                     const json& config) {
  const std::span<const double> params = model.parameters();
  json record = {{"feature_dim", model.feature_dim()},
                 {"modes", model.modes()},
                 {"horizon", model.horizon()},
                 {"mean_scale", model.mean_scale()},
                 {"min_std", model.min_std()},
                 {"steps", steps},
                 {"parameters",
                  std::vector<double>(params.begin(), params.end())}};
  WriteRecordFile(path, kCheckpointFormat, config, {record});
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  RecordFile file = ReadRecordFile(path, kCheckpointFormat);
  if (file.records.size() != 1) {
    throw FormatError(path.string(), 2, "checkpoint holds one record");
  }
  return DecodeRecord(path, 0, [&] {
    const json& r = file.records[0];
    Checkpoint out;
    out.config = file.config;
    out.model = StudentModel(r.at("feature_dim").get<int>(),
                             r.at("modes").get<int>(),
                             r.at("horizon").get<int>(),
                             r.at("mean_scale").get<double>(),
                             r.at("min_std").get<double>());
    out.steps = r.at("steps").get<int64_t>();
    const auto params = r.at("parameters").get<std::vector<double>>();
    if (params.size() != out.model.parameters().size()) {
      throw std::invalid_argument("parameter count does not match shape");
    }
    std::copy(params.begin(), params.end(), out.model.parameters().begin());
    return out;
  });
}

void WriteReport(const std::filesystem::path& path,
                 const MetricsReport& report, const json& config) {
  WriteRecordFile(path, kReportFormat, config, {ReportToJson(report)});
}

MetricsReport ReadReport(const std::filesystem::path& path) {
  RecordFile file = ReadRecordFile(path, kReportFormat);
  if (file.records.size() != 1) {
    throw FormatError(path.string(), 2, "report holds one record");
  }
  return DecodeRecord(path, 0, [&] { return ReportFromJson(file.records[0]); });
}

}  // namespace trajdistill
