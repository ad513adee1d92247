#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fdid/case_io.hpp"

namespace fdid {

struct DcSolution {
    Eigen::VectorXd angles;  // rad, reference bus fixed at 0
    Eigen::VectorXd flows;   // p.u., positive from `from` to `to`
};

// Branch x bus sensitivity of flows to a unit transfer from a bus to the
// reference bus, plus the critical load buses of every branch.
struct Ptdf {
    Eigen::MatrixXd matrix;  // branch_count x bus_count
    std::size_t reference_bus = 0;
    double critical_threshold = 0.01;
    std::vector<std::vector<std::size_t>> critical_sets;  // NL(k), ascending bus index

    std::size_t critical_count(std::size_t branch) const { return critical_sets[branch].size(); }
    bool smldi_eligible(std::size_t branch, std::size_t min_critical = 5) const {
        return critical_count(branch) >= min_critical;
    }
    // Flows for a balanced injection vector (p.u.). The reference column is
    // zero, so whatever sits at the reference bus is treated as the slack.
    Eigen::VectorXd flows(const Eigen::VectorXd& injections) const { return matrix * injections; }
};

// Factorizes the reduced nodal susceptance matrix once and reuses it for
// power flows and PTDF columns.
class DcPowerFlow {
public:
    explicit DcPowerFlow(const Network& net);

    DcSolution solve(const Eigen::VectorXd& injections) const;
    Ptdf ptdf(double critical_threshold = 0.01) const;

    // Branch-bus incidence scaled by 1/x: flows = branch_susceptance() * angles.
    const Eigen::MatrixXd& branch_susceptance() const { return bf_; }

private:
    std::vector<Bus> buses_;
    std::size_t reference_bus_ = 0;
    std::size_t branch_count_ = 0;
    Eigen::MatrixXd bf_;
    Eigen::LDLT<Eigen::MatrixXd> reduced_;
    std::vector<std::size_t> reduced_index_;  // reduced position -> bus index
};

DcSolution solve_dc(const Network& net, const Eigen::VectorXd& injections);
Ptdf compute_ptdf(const Network& net, double critical_threshold = 0.01);

// Nodal injections (p.u.) from per-bus generation and load in MW.
Eigen::VectorXd net_injections_pu(const Network& net, const Eigen::VectorXd& gen_mw, const Eigen::VectorXd& load_mw);

// Per-bus aggregate of per-generator outputs.
Eigen::VectorXd generation_by_bus(const Network& net, const std::vector<double>& gen_output_mw);

// Moves any injection imbalance onto the reference bus.
Eigen::VectorXd balance_at_reference(const Network& net, Eigen::VectorXd injections);

// Net outflow at each bus implied by branch flows: sum over K(n-) minus sum over K(n+).
Eigen::VectorXd branch_divergence(const Network& net, const Eigen::VectorXd& flows);

}  // namespace fdid
