#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "fdid/case_io.hpp"
#include "fdid/lp.hpp"
#include "fdid/state_estimation.hpp"

namespace fdid {

struct AttackSpec {
    std::size_t target = 0;      // branch position in Network::branches
    double load_shift = 0.1;     // L_S, fraction of each true load
    double l1_limit = 5.0;       // N_1, rad
    Eigen::VectorXd base_flows;  // P_k0, p.u.
    Eigen::VectorXd base_loads;  // d_n0, MW

    // Throws ContractError on out-of-range parameters or mismatched sizes.
    void validate(const Network& net) const;
};

struct AttackResult {
    Eigen::VectorXd c;        // rad per bus, reference at 0
    Eigen::VectorXd s;        // |c| auxiliaries
    Eigen::VectorXd delta_p;  // p.u. per branch, P_k0 - cyber flow
    Eigen::VectorXd delta_d;  // MW per bus, zero off the load buses
    double objective = 0.0;   // sgn(P_l0) * delta_p_l, p.u.
    Eigen::VectorXd tampered_loads;  // MW
    Eigen::VectorXd cyber_flows;     // p.u.
    std::size_t lp_iterations = 0;

    std::size_t tampered_count(double tol_mw = 1e-6) const;
};

// Variable layout of the attack LP: c then s (bus order), then delta_p
// (branch order).
struct AttackLayout {
    std::size_t buses = 0;
    std::size_t branches = 0;
    std::size_t c(std::size_t n) const { return n; }
    std::size_t s(std::size_t n) const { return buses + n; }
    std::size_t dp(std::size_t k) const { return 2 * buses + k; }
};

LinearProgram build_attack_lp(const Network& net, const AttackSpec& spec);
AttackResult solve_attack(const Network& net, const AttackSpec& spec);

// Worst residual of each defining relation, all in p.u. or rad.
struct AttackAudit {
    double flow_relation = 0.0;  // delta_p against c
    double load_relation = 0.0;  // delta_d against the delta_p divergence
    double load_bound = 0.0;     // |delta_d| beyond L_S d_n0
    double abs_value = 0.0;      // |c| beyond s
    double budget = 0.0;         // sum s beyond N_1
    double non_load = 0.0;       // delta_p divergence at buses without load
    double reference = 0.0;      // |c_ref|
    double objective = 0.0;      // reported objective against delta_p
    double derived = 0.0;        // tampered loads and cyber flows against the deltas

    double worst() const;
};

AttackAudit audit_attack(const Network& net, const AttackSpec& spec, const AttackResult& result);

// Flow measurements lose delta_p, load-bus injections lose delta_d; every
// other entry is passed through.
MeasurementSet apply_attack(const Network& net, const MeasurementSet& clean, const AttackResult& result);

// |J(tampered) - J(clean)| for the WLS estimator.
double check_unobservability(const Network& net, const AttackResult& result, const MeasurementSet& clean);

}  // namespace fdid
