#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdid/attack.hpp"
#include "fdid/detect.hpp"
#include "fdid/harness.hpp"
#include "fdid/powerflow.hpp"
#include "fdid/sced.hpp"

namespace fdid {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

Json to_json(const Network& net, const Ptdf& ptdf);
Json to_json(const Network& net, const Dispatch& dispatch);
Json to_json(const Network& net, const AttackSpec& spec, const AttackResult& result);
Json to_json(const DetectionReport& report);
Json to_json(const DetectorConfig& cfg);
Json to_json(const ScenarioConfig& cfg);
Json to_json(const ScenarioOutcome& outcome);
Json to_json(const GroupStats& stats);

// Measurement set and bad-data settings every scenario is estimated with.
Json measurement_model_json();

DetectorConfig detector_from_json(const Json& j, DetectorConfig base = {});
ScenarioConfig scenario_from_json(const Json& j);

// Suite files: {"seed": s, "defaults": {...}, "scenarios": [{...}, ...]}.
// Each scenario is merged over the defaults; a missing fluctuation seed is
// derived from the suite seed and the scenario's position.
std::vector<ScenarioConfig> suite_from_json(const Json& j);
Json suite_to_json(const std::vector<ScenarioConfig>& suite, std::uint64_t seed);

// Snapshot files name the case (and outages) so the PTDF can be rebuilt.
Json snapshot_to_json(const Snapshot& snap, const std::string& case_path, const std::vector<std::size_t>& outages);
Snapshot snapshot_from_json(const Json& j, const std::filesystem::path& relative_to = {});

// Per-bus MW vector from {"loads": {"<bus id>": mw, ...}} or a plain array in
// bus order. Buses missing from the object keep their case value.
Eigen::VectorXd loads_from_json(const Network& net, const Json& j);

// Writes summary.csv, report.json and scenarios/<id>.json under dir.
void write_experiment(const ExperimentReport& report, const std::filesystem::path& dir);
std::string summary_csv(const ExperimentReport& report);

}  // namespace fdid
