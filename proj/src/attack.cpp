#include "fdid/attack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdid/error.hpp"
#include "fdid/powerflow.hpp"

namespace fdid {

namespace {

constexpr double kSignEpsilon = 1e-12;  // p.u.

double sgn(double v) { return v > kSignEpsilon ? 1.0 : (v < -kSignEpsilon ? -1.0 : 0.0); }

Eigen::VectorXd flow_deltas(const Network& net, const Eigen::VectorXd& c) {
    Eigen::VectorXd dp(static_cast<Eigen::Index>(net.branch_count()));
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branches[k];
        dp[static_cast<Eigen::Index>(k)] =
            (c[static_cast<Eigen::Index>(br.to)] - c[static_cast<Eigen::Index>(br.from)]) / br.reactance;
    }
    return dp;
}

}  // namespace

void AttackSpec::validate(const Network& net) const {
    if (target >= net.branch_count()) throw ContractError("attack target is not an in-service branch");
    if (!(load_shift > 0.0 && load_shift <= 1.0)) throw ContractError("load shift factor must lie in (0, 1]");
    if (!(l1_limit >= 0.0) || !std::isfinite(l1_limit)) throw ContractError("l1 budget must be a finite non-negative number");
    if (base_flows.size() != static_cast<Eigen::Index>(net.branch_count())) throw ContractError("base flow length mismatch");
    if (base_loads.size() != static_cast<Eigen::Index>(net.bus_count())) throw ContractError("base load length mismatch");
}

std::size_t AttackResult::tampered_count(double tol_mw) const {
    return static_cast<std::size_t>((delta_d.array().abs() > tol_mw).count());
}

double AttackAudit::worst() const {
    return std::max({flow_relation, load_relation, load_bound, abs_value, budget, non_load, reference, objective, derived});
}

LinearProgram build_attack_lp(const Network& net, const AttackSpec& spec) {
    const std::size_t n = net.bus_count();
    const std::size_t k = net.branch_count();
    const AttackLayout at{n, k};
    const std::size_t width = 2 * n + k;

    LinearProgram lp;
    lp.sense = Sense::Maximize;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ref = i == net.reference_bus;
        lp.add_variable("c" + std::to_string(net.buses[i].external_id), ref ? 0.0 : -kInfinity, ref ? 0.0 : kInfinity);
    }
    for (std::size_t i = 0; i < n; ++i) lp.add_variable("s" + std::to_string(net.buses[i].external_id), 0.0, kInfinity);
    for (std::size_t b = 0; b < k; ++b) lp.add_variable("dp" + std::to_string(net.branches[b].ordinal), -kInfinity, kInfinity);
    lp.objective[at.dp(spec.target)] = sgn(spec.base_flows[static_cast<Eigen::Index>(spec.target)]);

    // delta_p_k = (-c_from + c_to) / x_k
    for (std::size_t b = 0; b < k; ++b) {
        const auto& br = net.branches[b];
        std::vector<double> row(width, 0.0);
        row[at.dp(b)] = 1.0;
        row[at.c(br.from)] += 1.0 / br.reactance;
        row[at.c(br.to)] -= 1.0 / br.reactance;
        lp.add_constraint(std::move(row), Relation::Equal, 0.0);
    }

    // Divergence of delta_p: bounded by the load shift at load buses, zero elsewhere.
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(width, 0.0);
        for (std::size_t b = 0; b < k; ++b) {
            if (net.branches[b].from == i) row[at.dp(b)] += 1.0;
            if (net.branches[b].to == i) row[at.dp(b)] -= 1.0;
        }
        if (net.buses[i].is_load_bus) {
            const double bound = spec.load_shift * spec.base_loads[static_cast<Eigen::Index>(i)] / net.base_mva;
            std::vector<double> neg(row);
            lp.add_constraint(std::move(row), Relation::LessEqual, bound);
            lp.add_constraint(std::move(neg), Relation::GreaterEqual, -bound);
        } else {
            lp.add_constraint(std::move(row), Relation::Equal, 0.0);
        }
    }

    // |c_n| <= s_n, sum s_n <= N_1
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> up(width, 0.0), down(width, 0.0);
        up[at.c(i)] = 1.0;
        up[at.s(i)] = -1.0;
        down[at.c(i)] = -1.0;
        down[at.s(i)] = -1.0;
        lp.add_constraint(std::move(up), Relation::LessEqual, 0.0);
        lp.add_constraint(std::move(down), Relation::LessEqual, 0.0);
    }
    std::vector<double> budget(width, 0.0);
    for (std::size_t i = 0; i < n; ++i) budget[at.s(i)] = 1.0;
    lp.add_constraint(std::move(budget), Relation::LessEqual, spec.l1_limit);
    return lp;
}

AttackResult solve_attack(const Network& net, const AttackSpec& spec) {
    spec.validate(net);
    const auto lp = build_attack_lp(net, spec);
    const auto sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) {
        // c = 0 is always feasible and the budget bounds c, so this is a solver fault.
        throw SolverError(std::string("attack LP returned ") + to_string(sol.status));
    }

    const std::size_t n = net.bus_count();
    const AttackLayout at{n, net.branch_count()};
    AttackResult r;
    r.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    r.s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        r.c[static_cast<Eigen::Index>(i)] = sol.values[at.c(i)];
        r.s[static_cast<Eigen::Index>(i)] = sol.values[at.s(i)];
    }
    r.c[static_cast<Eigen::Index>(net.reference_bus)] = 0.0;

    // Derived quantities come from c directly so the defining relations hold
    // to round-off rather than to the solver tolerance.
    r.delta_p = flow_deltas(net, r.c);
    const Eigen::VectorXd div = branch_divergence(net, r.delta_p) * net.base_mva;
    r.delta_d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& bus : net.buses) {
        if (bus.is_load_bus) r.delta_d[static_cast<Eigen::Index>(bus.index)] = div[static_cast<Eigen::Index>(bus.index)];
    }
    r.objective = sgn(spec.base_flows[static_cast<Eigen::Index>(spec.target)]) * r.delta_p[static_cast<Eigen::Index>(spec.target)];
    r.tampered_loads = spec.base_loads + r.delta_d;
    r.cyber_flows = spec.base_flows - r.delta_p;
    r.lp_iterations = sol.iterations;
    return r;
}

AttackAudit audit_attack(const Network& net, const AttackSpec& spec, const AttackResult& r) {
    AttackAudit a;
    const double base = net.base_mva;
    const Eigen::VectorXd dp = flow_deltas(net, r.c);
    a.flow_relation = (dp - r.delta_p).cwiseAbs().maxCoeff();

    const Eigen::VectorXd div = branch_divergence(net, r.delta_p);
    for (const auto& bus : net.buses) {
        const auto i = static_cast<Eigen::Index>(bus.index);
        if (bus.is_load_bus) {
            a.load_relation = std::max(a.load_relation, std::abs(div[i] - r.delta_d[i] / base));
            const double bound = spec.load_shift * spec.base_loads[i] / base;
            a.load_bound = std::max(a.load_bound, std::abs(r.delta_d[i]) / base - bound);
        } else {
            a.non_load = std::max({a.non_load, std::abs(div[i]), std::abs(r.delta_d[i]) / base});
        }
    }
    a.abs_value = (r.c.cwiseAbs() - r.s).maxCoeff();
    a.abs_value = std::max(a.abs_value, -r.s.minCoeff());
    a.budget = r.s.sum() - spec.l1_limit;
    a.reference = std::abs(r.c[static_cast<Eigen::Index>(net.reference_bus)]);
    const auto l = static_cast<Eigen::Index>(spec.target);
    a.objective = std::abs(sgn(spec.base_flows[l]) * r.delta_p[l] - r.objective);
    a.derived = std::max(((r.tampered_loads - spec.base_loads - r.delta_d) / base).cwiseAbs().maxCoeff(),
                         (r.cyber_flows - spec.base_flows + r.delta_p).cwiseAbs().maxCoeff());
    a.load_bound = std::max(a.load_bound, 0.0);
    a.abs_value = std::max(a.abs_value, 0.0);
    a.budget = std::max(a.budget, 0.0);
    return a;
}

MeasurementSet apply_attack(const Network& net, const MeasurementSet& clean, const AttackResult& result) {
    if (result.delta_p.size() != static_cast<Eigen::Index>(net.branch_count()) ||
        result.delta_d.size() != static_cast<Eigen::Index>(net.bus_count())) {
        throw ContractError("attack result does not match the network");
    }
    MeasurementSet out = clean;
    for (auto& m : out.entries) {
        if (m.kind == MeasurementKind::BranchFlow) {
            if (m.element >= net.branch_count()) throw ContractError("flow measurement on unknown branch");
            m.value -= result.delta_p[static_cast<Eigen::Index>(m.element)];
        } else {
            if (m.element >= net.bus_count()) throw ContractError("injection measurement on unknown bus");
            if (net.buses[m.element].is_load_bus) m.value -= result.delta_d[static_cast<Eigen::Index>(m.element)] / net.base_mva;
        }
    }
    return out;
}

double check_unobservability(const Network& net, const AttackResult& result, const MeasurementSet& clean) {
    const double before = wls_estimate(clean, net).weighted_residual_norm;
    const double after = wls_estimate(apply_attack(net, clean, result), net).weighted_residual_norm;
    return std::abs(after - before);
}

}  // namespace fdid
