#include "fdid/state_estimation.hpp"

#include <cmath>
#include <random>

#include "fdid/error.hpp"

namespace fdid {

Eigen::MatrixXd MeasurementSet::jacobian(const Network& net) const {
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(entries.size()), n);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const auto& m = entries[i];
        if (m.kind == MeasurementKind::BranchFlow) {
            if (m.element >= net.branch_count()) throw ContractError("flow measurement on unknown branch");
            const auto& br = net.branches[m.element];
            h(r, static_cast<Eigen::Index>(br.from)) += 1.0 / br.reactance;
            h(r, static_cast<Eigen::Index>(br.to)) -= 1.0 / br.reactance;
        } else {
            if (m.element >= net.bus_count()) throw ContractError("injection measurement on unknown bus");
            for (const auto& br : net.branches) {
                const double y = 1.0 / br.reactance;
                if (br.from == m.element) {
                    h(r, static_cast<Eigen::Index>(br.from)) += y;
                    h(r, static_cast<Eigen::Index>(br.to)) -= y;
                } else if (br.to == m.element) {
                    h(r, static_cast<Eigen::Index>(br.to)) += y;
                    h(r, static_cast<Eigen::Index>(br.from)) -= y;
                }
            }
        }
    }
    return h;
}

Eigen::VectorXd MeasurementSet::values() const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) z[static_cast<Eigen::Index>(i)] = entries[i].value;
    return z;
}

MeasurementSet build_measurements(const Network& net, const Eigen::VectorXd& flows, const Eigen::VectorXd& loads,
                                  const Eigen::VectorXd& gens, const NoiseSpec& noise) {
    const auto k = static_cast<Eigen::Index>(net.branch_count());
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    if (flows.size() != k || loads.size() != n || gens.size() != n) {
        throw ContractError("measurement inputs do not match the network dimensions");
    }
    if (noise.flow_sigma < 0.0 || noise.injection_sigma < 0.0 || !(noise.meter_sigma > 0.0)) {
        throw ContractError("noise standard deviations must be non-negative and meter_sigma positive");
    }

    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto weight = [&](double sigma) {
        const double s = sigma > 0.0 ? sigma : noise.meter_sigma;
        return 1.0 / (s * s);
    };

    MeasurementSet set;
    set.entries.reserve(static_cast<std::size_t>(k + n));
    for (Eigen::Index i = 0; i < k; ++i) {
        double v = flows[i];
        if (noise.flow_sigma > 0.0) v += noise.flow_sigma * normal(rng);
        set.entries.push_back({MeasurementKind::BranchFlow, static_cast<std::size_t>(i), v, weight(noise.flow_sigma)});
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = gens[i] - loads[i];
        if (noise.injection_sigma > 0.0) v += noise.injection_sigma * normal(rng);
        set.entries.push_back({MeasurementKind::BusInjection, static_cast<std::size_t>(i), v, weight(noise.injection_sigma)});
    }
    return set;
}

SeResult wls_estimate(const MeasurementSet& meas, const Network& net, double lnr_threshold) {
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    const auto m = static_cast<Eigen::Index>(meas.size());
    const auto ref = static_cast<Eigen::Index>(net.reference_bus);
    const Eigen::MatrixXd h = meas.jacobian(net);
    const Eigen::VectorXd z = meas.values();

    Eigen::VectorXd sqrt_w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double w = meas.entries[static_cast<std::size_t>(i)].weight;
        if (!(w > 0.0)) throw ContractError("measurement weights must be positive");
        sqrt_w[i] = std::sqrt(w);
    }

    // Drop the reference column; its angle is fixed at zero.
    Eigen::MatrixXd hr(m, n - 1);
    if (ref > 0) hr.leftCols(ref) = h.leftCols(ref);
    if (n - 1 - ref > 0) hr.rightCols(n - 1 - ref) = h.rightCols(n - 1 - ref);

    const Eigen::MatrixXd a = sqrt_w.asDiagonal() * hr;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < n - 1) {
        throw ObservabilityError("measurement set leaves " + std::to_string(n - 1 - qr.rank()) + " angle(s) unobservable");
    }
    const Eigen::VectorXd xr = qr.solve(sqrt_w.cwiseProduct(z));

    SeResult out;
    out.angles = Eigen::VectorXd::Zero(n);
    if (ref > 0) out.angles.head(ref) = xr.head(ref);
    if (n - 1 - ref > 0) out.angles.tail(n - 1 - ref) = xr.tail(n - 1 - ref);

    const Eigen::VectorXd fitted = h * out.angles;
    out.residuals = z - fitted;
    out.weighted_residual_norm = out.residuals.cwiseProduct(sqrt_w).squaredNorm();

    out.flows = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.branch_count()));
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branches[k];
        out.flows[static_cast<Eigen::Index>(k)] =
            (out.angles[static_cast<Eigen::Index>(br.from)] - out.angles[static_cast<Eigen::Index>(br.to)]) / br.reactance;
    }
    out.injections = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branches[k];
        out.injections[static_cast<Eigen::Index>(br.from)] += out.flows[static_cast<Eigen::Index>(k)];
        out.injections[static_cast<Eigen::Index>(br.to)] -= out.flows[static_cast<Eigen::Index>(k)];
    }

    // Residual covariance diagonal: 1/w_i - h_i G^-1 h_i', with G = A'A.
    const Eigen::MatrixXd gain = a.transpose() * a;
    const Eigen::LDLT<Eigen::MatrixXd> gain_ldlt(gain);
    const Eigen::MatrixXd g_inv_ht = gain_ldlt.solve(hr.transpose());
    out.normalized_residuals = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double variance_meas = 1.0 / (sqrt_w[i] * sqrt_w[i]);
        const double omega = variance_meas - hr.row(i).dot(g_inv_ht.col(i));
        if (omega > 1e-10 * variance_meas) {
            out.normalized_residuals[i] = out.residuals[i] / std::sqrt(omega);
        }
        if (std::abs(out.normalized_residuals[i]) > out.lnr_value) {
            out.lnr_value = std::abs(out.normalized_residuals[i]);
            out.lnr_index = static_cast<std::size_t>(i);
        }
    }
    out.bad_data = out.lnr_value > lnr_threshold;
    return out;
}

}  // namespace fdid
