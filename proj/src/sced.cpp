#include "fdid/sced.hpp"

#include <cmath>
#include <string>

#include "fdid/error.hpp"
#include "fdid/lp.hpp"

namespace fdid {

namespace {

constexpr double kBindingTol = 1e-7;  // p.u.

std::vector<std::size_t> branches_at_limit(const Network& net, const Eigen::VectorXd& flows, double tol) {
    std::vector<std::size_t> out;
    const Eigen::VectorXd limits = net.limits_pu();
    for (Eigen::Index k = 0; k < flows.size(); ++k) {
        if (std::abs(flows[k]) >= limits[k] - tol) out.push_back(static_cast<std::size_t>(k));
    }
    return out;
}

std::string ordinals_text(const Network& net, const std::vector<std::size_t>& positions) {
    std::string s;
    for (auto k : positions) {
        if (!s.empty()) s += ",";
        s += std::to_string(net.branches[k].ordinal);
    }
    return s;
}

LpSolution solve_dispatch(const Network& net, const Ptdf& ptdf, const Eigen::VectorXd& loads_mw, bool limits) {
    const double base = net.base_mva;
    LinearProgram lp;
    lp.sense = Sense::Minimize;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        lp.add_variable("p" + std::to_string(g), gen.p_min / base, gen.p_max / base, gen.linear_cost * base);
    }
    const std::size_t ng = net.generators.size();
    lp.add_constraint(std::vector<double>(ng, 1.0), Relation::Equal, loads_mw.sum() / base);

    if (limits) {
        const Eigen::VectorXd load_flow = ptdf.flows(loads_mw / base);
        const Eigen::VectorXd lim = net.limits_pu();
        for (std::size_t k = 0; k < net.branch_count(); ++k) {
            const auto ek = static_cast<Eigen::Index>(k);
            std::vector<double> row(ng);
            for (std::size_t g = 0; g < ng; ++g) row[g] = ptdf.matrix(ek, static_cast<Eigen::Index>(net.generators[g].bus));
            lp.add_constraint(row, Relation::LessEqual, lim[ek] + load_flow[ek]);
            lp.add_constraint(std::move(row), Relation::GreaterEqual, -lim[ek] + load_flow[ek]);
        }
    }
    return solve_lp(lp);
}

}  // namespace

Eigen::VectorXd flows_for(const Network& net, const Ptdf& ptdf, const std::vector<double>& gen_output_mw,
                          const Eigen::VectorXd& loads_mw) {
    return ptdf.flows(net_injections_pu(net, generation_by_bus(net, gen_output_mw), loads_mw));
}

Dispatch run_sced(const Network& net, const Ptdf& ptdf, const Eigen::VectorXd& loads_mw, const ScedOptions& options) {
    if (loads_mw.size() != static_cast<Eigen::Index>(net.bus_count())) {
        throw ContractError("load vector length does not match bus count");
    }
    double cap_max = 0.0, cap_min = 0.0;
    for (const auto& g : net.generators) {
        cap_max += g.p_max;
        cap_min += g.p_min;
    }
    const double demand = loads_mw.sum();
    if (demand > cap_max + 1e-9 || demand < cap_min - 1e-9) {
        throw DispatchError("demand " + std::to_string(demand) + " MW outside generation range [" + std::to_string(cap_min) +
                                ", " + std::to_string(cap_max) + "] MW",
                            {}, true);
    }

    const auto sol = solve_dispatch(net, ptdf, loads_mw, options.enforce_branch_limits);
    if (sol.status != LpStatus::Optimal) {
        // Report the limits the unconstrained merit-order dispatch would break.
        const auto free = solve_dispatch(net, ptdf, loads_mw, false);
        std::vector<std::size_t> violated;
        if (free.status == LpStatus::Optimal) {
            std::vector<double> mw(free.values.size());
            for (std::size_t g = 0; g < mw.size(); ++g) mw[g] = free.values[g] * net.base_mva;
            const Eigen::VectorXd flows = flows_for(net, ptdf, mw, loads_mw);
            violated = branches_at_limit(net, flows, -kBindingTol);
        }
        throw DispatchError("congestion cannot be relieved (branches " + ordinals_text(net, violated) + ")", violated, false);
    }

    Dispatch out;
    out.gen_output_mw.resize(net.generators.size());
    for (std::size_t g = 0; g < out.gen_output_mw.size(); ++g) {
        out.gen_output_mw[g] = sol.values[g] * net.base_mva;
        out.total_cost += net.generators[g].linear_cost * out.gen_output_mw[g];
    }
    out.scheduled_flows = flows_for(net, ptdf, out.gen_output_mw, loads_mw);
    out.binding_branches = branches_at_limit(net, out.scheduled_flows, kBindingTol);
    return out;
}

Dispatch run_sced(const Network& net, const Eigen::VectorXd& loads_mw, const ScedOptions& options) {
    return run_sced(net, compute_ptdf(net), loads_mw, options);
}

}  // namespace fdid
