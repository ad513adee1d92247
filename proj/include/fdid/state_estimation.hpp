#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fdid/case_io.hpp"

namespace fdid {

enum class MeasurementKind { BranchFlow, BusInjection };

struct Measurement {
    MeasurementKind kind = MeasurementKind::BranchFlow;
    std::size_t element = 0;  // branch position or bus index
    double value = 0.0;       // p.u.
    double weight = 1.0;      // 1 / sigma^2
};

struct MeasurementSet {
    std::vector<Measurement> entries;

    std::size_t size() const { return entries.size(); }
    // Jacobian of the measurements with respect to all bus angles.
    Eigen::MatrixXd jacobian(const Network& net) const;
    Eigen::VectorXd values() const;
};

struct NoiseSpec {
    double flow_sigma = 0.0;       // p.u. standard deviation of added noise
    double injection_sigma = 0.0;
    std::uint64_t seed = 0;
    // Standard deviation assumed by the estimator when no noise is added.
    double meter_sigma = 0.01;
};

// One flow measurement per in-service branch followed by one net-injection
// measurement per bus (gen - load). Inputs in p.u.
MeasurementSet build_measurements(const Network& net, const Eigen::VectorXd& flows, const Eigen::VectorXd& loads,
                                  const Eigen::VectorXd& gens, const NoiseSpec& noise = {});

struct SeResult {
    Eigen::VectorXd angles;       // rad, reference at 0
    Eigen::VectorXd flows;        // estimated branch flows, p.u.
    Eigen::VectorXd injections;   // estimated bus injections, p.u.
    Eigen::VectorXd residuals;    // z - H x
    Eigen::VectorXd normalized_residuals;  // 0 where the residual variance vanishes
    double weighted_residual_norm = 0.0;   // J = r' W r
    double lnr_value = 0.0;
    std::size_t lnr_index = 0;
    bool bad_data = false;
};

inline constexpr double kLnrThreshold = 3.0;

// Weighted least squares with the reference angle fixed at zero. Throws
// ObservabilityError when the measurements do not determine every angle.
SeResult wls_estimate(const MeasurementSet& meas, const Network& net, double lnr_threshold = kLnrThreshold);

}  // namespace fdid
