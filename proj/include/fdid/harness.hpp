#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdid/attack.hpp"
#include "fdid/case_io.hpp"
#include "fdid/detect.hpp"
#include "fdid/powerflow.hpp"
#include "fdid/sced.hpp"
#include "fdid/state_estimation.hpp"

namespace fdid {

enum class ScenarioMode { FluctuationOnly, Attack };

const char* to_string(ScenarioMode mode);

struct FluctuationSpec {
    double mu = 0.0;     // fraction
    double sigma = 0.0;  // fraction
    std::uint64_t seed = 0;
};

struct AttackParams {
    std::size_t target_branch = 0;  // external ordinal
    double load_shift = 0.1;
    double l1_limit = 5.0;
};

struct ScenarioConfig {
    std::string id;
    std::string group;
    std::string case_path;
    std::vector<std::size_t> outages;
    ScenarioMode mode = ScenarioMode::FluctuationOnly;
    FluctuationSpec fluctuation;
    std::optional<AttackParams> attack;  // required exactly when mode is Attack
    double noise_sigma = 0.0;            // p.u., applied to every measurement
    DetectorConfig detector;

    void validate() const;
};

// Network plus the factorization products every scenario on it reuses.
struct StudyCase {
    Network net;
    std::shared_ptr<const Ptdf> ptdf;

    static std::shared_ptr<const StudyCase> load(const std::string& case_path, const std::vector<std::size_t>& outages);
    static std::shared_ptr<const StudyCase> from_network(Network net);
};

// Splitmix64 mix of the suite seed and the scenario index.
std::uint64_t derive_seed(std::uint64_t suite_seed, std::uint64_t index);

// Clipped standard normal draws scaled to v = draw * sigma + mu; returns
// d_n * v_n at load buses and 0 elsewhere (MW).
Eigen::VectorXd gen_fluctuation(const Network& net, const Eigen::VectorXd& loads_mw, double mu, double sigma,
                                std::uint64_t seed);

inline constexpr double kFluctuationCutoff = 1.96;

struct TimelineResult {
    Snapshot snapshot;
    Eigen::VectorXd true_loads;      // d_n0, MW
    Eigen::VectorXd physical_flows;  // P_k0 at t = 0, p.u.
    Eigen::VectorXd next_flows;      // physical flows at t = +dT, p.u.
    Dispatch prev_dispatch;
    Dispatch next_dispatch;
    std::optional<AttackResult> attack;
    std::optional<std::size_t> target;  // branch position
    double target_overload_mw = 0.0;    // |physical flow on target| - limit, attack mode only
    double residual_norm = 0.0;         // WLS objective on the measurements used
    double lnr_value = 0.0;
    bool bad_data = false;
    double balance_error = 0.0;  // p.u., worst generation/load mismatch over both intervals
};

TimelineResult run_timeline(const StudyCase& study, const ScenarioConfig& config);
TimelineResult run_timeline(const ScenarioConfig& config);

struct ScenarioOutcome {
    std::string id;
    std::string group;
    ScenarioMode mode = ScenarioMode::FluctuationOnly;
    bool ok = false;
    std::string error;
    double smldi = 0.0;
    AlertLevel stage1_alert = AlertLevel::Normal;
    bool under_attack = false;
    std::optional<std::size_t> target_ordinal;
    std::size_t target_rank = 0;  // CAI rank, 0 when stage 2 did not run
    double target_cai = 0.0;
    bool target_top_cai = false;
    bool target_danger = false;
    bool identified = false;
    double overload_mw = 0.0;
    std::size_t tampered_loads = 0;
    double lnr_value = 0.0;
    bool bad_data = false;
    std::optional<DetectionReport> report;
};

struct GroupStats {
    std::string group;
    std::size_t scenarios = 0;
    std::size_t failures = 0;
    double max = 0.0, min = 0.0, median = 0.0, average = 0.0, std = 0.0;  // SMLDI, fraction
    std::size_t detected = 0;      // stage-1 Warning or Danger
    std::size_t identified = 0;    // target among the suspects
    std::size_t top_cai = 0;       // target in the CAI top three
    std::size_t danger_marked = 0; // target marked Danger
    double average_rank = 0.0;     // over scenarios where stage 2 ran
    double average_overload_mw = 0.0;
};

struct ExperimentReport {
    std::vector<ScenarioOutcome> outcomes;  // suite order
    std::vector<GroupStats> groups;         // first-appearance order
};

struct RunOptions {
    std::size_t threads = 0;  // 0 = hardware concurrency
    bool keep_reports = true;
};

ScenarioOutcome evaluate_scenario(const StudyCase& study, const ScenarioConfig& config, bool keep_report = true);
ExperimentReport run_experiment(const std::vector<ScenarioConfig>& suite, const RunOptions& options = {});
GroupStats summarize(const std::string& group, const std::vector<const ScenarioOutcome*>& members);

// Grids used in the reproduction study. Seeds come from derive_seed.
std::vector<ScenarioConfig> reference_suite_118(const std::string& case_path, std::uint64_t seed = 2017);
std::vector<ScenarioConfig> outage_suite_118(const std::string& case_path, std::size_t outage, std::uint64_t seed = 2017);
std::vector<ScenarioConfig> reference_suite_rts96(const std::string& case_path, std::uint64_t seed = 2017);

}  // namespace fdid
