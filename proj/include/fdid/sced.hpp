#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fdid/case_io.hpp"
#include "fdid/powerflow.hpp"

namespace fdid {

struct ScedOptions {
    bool enforce_branch_limits = true;
};

struct Dispatch {
    std::vector<double> gen_output_mw;  // per generator, in Network::generators order
    Eigen::VectorXd scheduled_flows;    // p.u., per in-service branch
    double total_cost = 0.0;            // $/h
    std::vector<std::size_t> binding_branches;  // branch positions at their limit
};

// Linear-cost DC dispatch: minimize sum c_g p_g subject to power balance,
// generator bounds and PTDF flow limits on every in-service branch. Throws
// DispatchError when the loads cannot be served.
Dispatch run_sced(const Network& net, const Ptdf& ptdf, const Eigen::VectorXd& loads_mw, const ScedOptions& options = {});
Dispatch run_sced(const Network& net, const Eigen::VectorXd& loads_mw, const ScedOptions& options = {});

// Physical flows (p.u.) for a dispatch serving the given loads; any imbalance
// lands on the reference bus.
Eigen::VectorXd flows_for(const Network& net, const Ptdf& ptdf, const std::vector<double>& gen_output_mw,
                          const Eigen::VectorXd& loads_mw);

}  // namespace fdid
