#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdid/powerflow.hpp"

namespace fdid {

enum class AlertLevel { Normal = 0, Monitor = 1, Warning = 2, Danger = 3 };

const char* to_string(AlertLevel level);
AlertLevel alert_from_string(const std::string& text);

// Strict lower edges of Danger, Warning and Monitor.
struct AlertThresholds {
    double danger = 0.0;
    double warning = 0.0;
    double monitor = 0.0;

    AlertLevel classify(double value) const;
};

struct DetectorConfig {
    AlertThresholds bori{1.15, 1.10, 1.05};
    AlertThresholds mldi{0.50, 0.35, 0.20};  // EMLDI per branch and SMLDI
    double dead_band = 0.05;
    // Relative load changes within this distance of the dead band edge count
    // as reaching it, so loads sitting exactly on an LP bound are not lost to
    // round-off.
    double dead_band_tolerance = 1e-9;
    std::size_t top_n = 10;
    std::size_t min_critical = 5;
    std::size_t cai_top = 3;

    void validate() const;
};

struct Snapshot {
    Eigen::VectorXd prev_flows;      // P_k-, p.u.
    Eigen::VectorXd prev_loads;      // d_n-, MW
    Eigen::VectorXd measured_flows;  // P_k0,M, p.u.
    Eigen::VectorXd measured_loads;  // d_n0,M, MW
    Eigen::VectorXd sced_flows;      // P_k+,SCED, p.u.
    Eigen::VectorXd limits;          // p.u.
    std::vector<std::size_t> branch_ordinals;
    std::shared_ptr<const Ptdf> ptdf;

    std::size_t branch_count() const { return static_cast<std::size_t>(limits.size()); }
    // Throws ContractError on inconsistent sizes or non-positive limits.
    void validate() const;
};

struct BoriValue {
    double bori1 = 0.0;
    double bori2 = 0.0;
    double bori = 0.0;
    AlertLevel alb = AlertLevel::Normal;
};

struct MldiValue {
    double mldi = 0.0;
    std::vector<int> indicators;  // aligned with the branch's critical set
};

struct EmldiValue {
    double emldi = 0.0;
    AlertLevel ale = AlertLevel::Normal;
};

struct SmldiValue {
    double smldi = 0.0;
    AlertLevel alert = AlertLevel::Normal;
    std::vector<std::size_t> members;  // branch positions in KA, by rank
};

BoriValue bori(std::size_t k, const Snapshot& snap, const DetectorConfig& cfg = {});
MldiValue mldi(std::size_t k, const Snapshot& snap, const DetectorConfig& cfg = {});
EmldiValue emldi(std::size_t k, const Snapshot& snap, const DetectorConfig& cfg = {});
// Mean of the top_n eligible MLDI values. Throws ConfigError without eligible branches.
SmldiValue smldi(const std::vector<double>& mldi_values, const Snapshot& snap, const DetectorConfig& cfg = {});
AlertLevel combine_alert(AlertLevel alb, AlertLevel ale);

struct BranchMetrics {
    std::size_t ordinal = 0;
    std::size_t critical_count = 0;
    double bori1 = 0.0, bori2 = 0.0, bori = 0.0;
    AlertLevel alb = AlertLevel::Normal;
    double mldi = 0.0, emldi = 0.0;
    AlertLevel ale = AlertLevel::Normal;
};

struct Suspect {
    std::size_t branch = 0;  // position
    std::size_t ordinal = 0;
    bool danger = false;
    bool top_cai = false;
};

struct StageTwo {
    std::vector<AlertLevel> alc;
    std::vector<double> cai;
    std::vector<std::size_t> cai_rank;  // 1-based
    std::vector<Suspect> suspects;      // in CAI rank order
};

struct DetectionReport {
    std::vector<BranchMetrics> branches;
    double smldi = 0.0;
    std::vector<std::size_t> ka;
    AlertLevel stage1_alert = AlertLevel::Normal;
    bool under_attack = false;
    std::size_t reference_bus = 0;
    std::optional<StageTwo> stage2;  // present only when under_attack

    bool is_suspect(std::size_t branch) const;
};

// CAI ranks, descending with lower ordinal first on ties.
std::vector<std::size_t> rank_descending(const std::vector<double>& values, const std::vector<std::size_t>& ordinals);

DetectionReport run_two_stage(const Snapshot& snap, const DetectorConfig& cfg = {});

}  // namespace fdid
