#include "fdid/powerflow.hpp"

#include <cmath>

#include "fdid/error.hpp"

namespace fdid {

DcPowerFlow::DcPowerFlow(const Network& net)
    : buses_(net.buses), reference_bus_(net.reference_bus), branch_count_(net.branch_count()) {
    const auto n = net.bus_count();
    const auto k = net.branch_count();
    bf_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < k; ++i) {
        const auto& br = net.branches[i];
        const double y = 1.0 / br.reactance;
        const auto f = static_cast<Eigen::Index>(br.from);
        const auto t = static_cast<Eigen::Index>(br.to);
        bf_(static_cast<Eigen::Index>(i), f) += y;
        bf_(static_cast<Eigen::Index>(i), t) -= y;
        b(f, f) += y;
        b(t, t) += y;
        b(f, t) -= y;
        b(t, f) -= y;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (i != net.reference_bus) reduced_index_.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(reduced_index_.size());
    Eigen::MatrixXd reduced(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
            reduced(r, c) = b(static_cast<Eigen::Index>(reduced_index_[r]), static_cast<Eigen::Index>(reduced_index_[c]));
        }
    }
    if (m > 0) {
        reduced_.compute(reduced);
        const auto& d = reduced_.vectorD();
        const double scale = d.cwiseAbs().maxCoeff();
        if (reduced_.info() != Eigen::Success || !(d.minCoeff() > 1e-12 * scale)) {
            throw NumericError("reduced susceptance matrix is singular");
        }
    }
}

DcSolution DcPowerFlow::solve(const Eigen::VectorXd& injections) const {
    const auto n = static_cast<Eigen::Index>(buses_.size());
    if (injections.size() != n) throw ContractError("injection vector length does not match bus count");
    if (std::abs(injections.sum()) > 1e-9) throw ContractError("injections are not balanced");

    DcSolution sol;
    sol.angles = Eigen::VectorXd::Zero(n);
    if (!reduced_index_.empty()) {
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(reduced_index_.size()));
        for (std::size_t i = 0; i < reduced_index_.size(); ++i) {
            rhs[static_cast<Eigen::Index>(i)] = injections[static_cast<Eigen::Index>(reduced_index_[i])];
        }
        const Eigen::VectorXd theta = reduced_.solve(rhs);
        for (std::size_t i = 0; i < reduced_index_.size(); ++i) {
            sol.angles[static_cast<Eigen::Index>(reduced_index_[i])] = theta[static_cast<Eigen::Index>(i)];
        }
    }
    sol.flows = bf_ * sol.angles;
    return sol;
}

Ptdf DcPowerFlow::ptdf(double critical_threshold) const {
    const auto n = static_cast<Eigen::Index>(buses_.size());
    const auto k = static_cast<Eigen::Index>(branch_count_);
    const auto m = static_cast<Eigen::Index>(reduced_index_.size());

    Ptdf out;
    out.reference_bus = reference_bus_;
    out.critical_threshold = critical_threshold;
    out.matrix = Eigen::MatrixXd::Zero(k, n);
    if (m > 0) {
        const Eigen::MatrixXd x = reduced_.solve(Eigen::MatrixXd::Identity(m, m));
        Eigen::MatrixXd bf_reduced(k, m);
        for (Eigen::Index c = 0; c < m; ++c) bf_reduced.col(c) = bf_.col(static_cast<Eigen::Index>(reduced_index_[c]));
        const Eigen::MatrixXd cols = bf_reduced * x;
        for (Eigen::Index c = 0; c < m; ++c) out.matrix.col(static_cast<Eigen::Index>(reduced_index_[c])) = cols.col(c);
    }

    out.critical_sets.resize(static_cast<std::size_t>(k));
    for (Eigen::Index br = 0; br < k; ++br) {
        for (const auto& bus : buses_) {
            if (bus.is_load_bus && std::abs(out.matrix(br, static_cast<Eigen::Index>(bus.index))) >= critical_threshold) {
                out.critical_sets[static_cast<std::size_t>(br)].push_back(bus.index);
            }
        }
    }
    return out;
}

DcSolution solve_dc(const Network& net, const Eigen::VectorXd& injections) {
    return DcPowerFlow(net).solve(injections);
}

Ptdf compute_ptdf(const Network& net, double critical_threshold) {
    return DcPowerFlow(net).ptdf(critical_threshold);
}

Eigen::VectorXd net_injections_pu(const Network& net, const Eigen::VectorXd& gen_mw, const Eigen::VectorXd& load_mw) {
    return (gen_mw - load_mw) / net.base_mva;
}

Eigen::VectorXd generation_by_bus(const Network& net, const std::vector<double>& gen_output_mw) {
    if (gen_output_mw.size() != net.generators.size()) throw ContractError("generator output length mismatch");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.bus_count()));
    for (std::size_t i = 0; i < gen_output_mw.size(); ++i) {
        g[static_cast<Eigen::Index>(net.generators[i].bus)] += gen_output_mw[i];
    }
    return g;
}

Eigen::VectorXd balance_at_reference(const Network& net, Eigen::VectorXd injections) {
    const double mismatch = injections.sum();
    injections[static_cast<Eigen::Index>(net.reference_bus)] -= mismatch;
    return injections;
}

Eigen::VectorXd branch_divergence(const Network& net, const Eigen::VectorXd& flows) {
    Eigen::VectorXd div = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.bus_count()));
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branches[k];
        div[static_cast<Eigen::Index>(br.from)] += flows[static_cast<Eigen::Index>(k)];
        div[static_cast<Eigen::Index>(br.to)] -= flows[static_cast<Eigen::Index>(k)];
    }
    return div;
}

}  // namespace fdid
