#include "fdid/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdid/error.hpp"

namespace fdid {

namespace {

constexpr double kSignEpsilon = 1e-12;  // p.u.

double sgn(double v) { return v > kSignEpsilon ? 1.0 : (v < -kSignEpsilon ? -1.0 : 0.0); }

constexpr AlertLevel N = AlertLevel::Normal;
constexpr AlertLevel M = AlertLevel::Monitor;
constexpr AlertLevel W = AlertLevel::Warning;
constexpr AlertLevel D = AlertLevel::Danger;

// Rows: ALB, columns: ALE.
constexpr std::array<std::array<AlertLevel, 4>, 4> kCombined{{
    {N, M, M, W},
    {M, M, W, W},
    {M, W, W, D},
    {W, W, D, D},
}};

double load_change_ratio(const Snapshot& snap, std::size_t bus) {
    const auto n = static_cast<Eigen::Index>(bus);
    const double prev = snap.prev_loads[n];
    if (!(prev > 0.0)) return 0.0;
    return (snap.measured_loads[n] - prev) / prev;
}

int direction(double ratio, const DetectorConfig& cfg) {
    if (ratio >= cfg.dead_band - cfg.dead_band_tolerance) return 1;
    if (ratio <= -cfg.dead_band + cfg.dead_band_tolerance) return -1;
    return 0;
}

}  // namespace

const char* to_string(AlertLevel level) {
    switch (level) {
        case AlertLevel::Normal: return "Normal";
        case AlertLevel::Monitor: return "Monitor";
        case AlertLevel::Warning: return "Warning";
        case AlertLevel::Danger: return "Danger";
    }
    return "?";
}

AlertLevel alert_from_string(const std::string& text) {
    for (auto level : {N, M, W, D}) {
        if (text == to_string(level)) return level;
    }
    throw ConfigError("unknown alert level '" + text + "'");
}

AlertLevel AlertThresholds::classify(double value) const {
    if (value > danger) return D;
    if (value > warning) return W;
    if (value > monitor) return M;
    return N;
}

void DetectorConfig::validate() const {
    for (const auto* t : {&bori, &mldi}) {
        if (!(t->danger >= t->warning && t->warning >= t->monitor)) throw ConfigError("alert thresholds must be ordered");
    }
    if (!(dead_band > 0.0) || dead_band_tolerance < 0.0) throw ConfigError("dead band must be positive");
    if (top_n == 0) throw ConfigError("top_n must be positive");
}

void Snapshot::validate() const {
    const auto k = limits.size();
    if (!ptdf) throw ContractError("snapshot has no PTDF");
    if (prev_flows.size() != k || measured_flows.size() != k || sced_flows.size() != k ||
        static_cast<Eigen::Index>(branch_ordinals.size()) != k || ptdf->matrix.rows() != k) {
        throw ContractError("snapshot branch vectors differ in length");
    }
    const auto n = ptdf->matrix.cols();
    if (prev_loads.size() != n || measured_loads.size() != n) throw ContractError("snapshot bus vectors differ in length");
    if (k > 0 && !(limits.minCoeff() > 0.0)) throw ContractError("snapshot limits must be positive");
}

BoriValue bori(std::size_t k, const Snapshot& snap, const DetectorConfig& cfg) {
    const auto i = static_cast<Eigen::Index>(k);
    const double prev = snap.prev_flows[i];
    const double s = sgn(prev);
    BoriValue v;
    v.bori1 = s * (prev - snap.measured_flows[i] + prev) / snap.limits[i];
    v.bori2 = s * (prev - snap.measured_flows[i] + snap.sced_flows[i]) / snap.limits[i];
    v.bori = std::max(v.bori1, v.bori2);
    v.alb = cfg.bori.classify(v.bori);
    return v;
}

MldiValue mldi(std::size_t k, const Snapshot& snap, const DetectorConfig& cfg) {
    const auto& crit = snap.ptdf->critical_sets[k];
    MldiValue v;
    v.indicators.reserve(crit.size());
    int sum = 0;
    for (auto bus : crit) {
        const double p = snap.ptdf->matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(bus));
        const int ind = direction(load_change_ratio(snap, bus), cfg) * static_cast<int>(sgn(p));
        v.indicators.push_back(ind);
        sum += ind;
    }
    if (!crit.empty()) {
        v.mldi = sgn(snap.prev_flows[static_cast<Eigen::Index>(k)]) * static_cast<double>(sum) / static_cast<double>(crit.size());
    }
    return v;
}

EmldiValue emldi(std::size_t k, const Snapshot& snap, const DetectorConfig& cfg) {
    const auto& crit = snap.ptdf->critical_sets[k];
    const auto ind = mldi(k, snap, cfg).indicators;
    double weighted = 0.0, total = 0.0;
    for (std::size_t j = 0; j < crit.size(); ++j) {
        const auto n = static_cast<Eigen::Index>(crit[j]);
        const double w = std::abs((snap.measured_loads[n] - snap.prev_loads[n]) * snap.ptdf->matrix(static_cast<Eigen::Index>(k), n));
        total += w;
        weighted += w * ind[j];
    }
    EmldiValue v;
    if (total > 0.0) v.emldi = sgn(snap.prev_flows[static_cast<Eigen::Index>(k)]) * weighted / total;
    v.ale = cfg.mldi.classify(v.emldi);
    return v;
}

SmldiValue smldi(const std::vector<double>& mldi_values, const Snapshot& snap, const DetectorConfig& cfg) {
    std::vector<std::size_t> eligible;
    for (std::size_t k = 0; k < mldi_values.size(); ++k) {
        if (snap.ptdf->smldi_eligible(k, cfg.min_critical)) eligible.push_back(k);
    }
    if (eligible.empty()) throw ConfigError("no branch has enough critical load buses for SMLDI");
    std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
        if (mldi_values[a] != mldi_values[b]) return mldi_values[a] > mldi_values[b];
        return snap.branch_ordinals[a] < snap.branch_ordinals[b];
    });
    SmldiValue v;
    v.members.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.top_n, eligible.size())));
    double sum = 0.0;
    for (auto k : v.members) sum += mldi_values[k];
    v.smldi = sum / static_cast<double>(v.members.size());
    v.alert = cfg.mldi.classify(v.smldi);
    return v;
}

AlertLevel combine_alert(AlertLevel alb, AlertLevel ale) {
    return kCombined[static_cast<std::size_t>(alb)][static_cast<std::size_t>(ale)];
}

std::vector<std::size_t> rank_descending(const std::vector<double>& values, const std::vector<std::size_t>& ordinals) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return ordinals[a] < ordinals[b];
    });
    std::vector<std::size_t> rank(values.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
    return rank;
}

bool DetectionReport::is_suspect(std::size_t branch) const {
    if (!stage2) return false;
    return std::any_of(stage2->suspects.begin(), stage2->suspects.end(), [&](const Suspect& s) { return s.branch == branch; });
}

DetectionReport run_two_stage(const Snapshot& snap, const DetectorConfig& cfg) {
    snap.validate();
    cfg.validate();
    const std::size_t kc = snap.branch_count();

    DetectionReport rep;
    rep.reference_bus = snap.ptdf->reference_bus;
    rep.branches.resize(kc);
    std::vector<double> mldi_values(kc);
    for (std::size_t k = 0; k < kc; ++k) {
        auto& b = rep.branches[k];
        b.ordinal = snap.branch_ordinals[k];
        b.critical_count = snap.ptdf->critical_count(k);
        const auto bv = bori(k, snap, cfg);
        b.bori1 = bv.bori1;
        b.bori2 = bv.bori2;
        b.bori = bv.bori;
        b.alb = bv.alb;
        b.mldi = mldi_values[k] = mldi(k, snap, cfg).mldi;
        const auto ev = emldi(k, snap, cfg);
        b.emldi = ev.emldi;
        b.ale = ev.ale;
    }

    const auto sv = smldi(mldi_values, snap, cfg);
    rep.smldi = sv.smldi;
    rep.ka = sv.members;
    rep.stage1_alert = sv.alert;
    rep.under_attack = sv.alert >= AlertLevel::Warning;
    if (!rep.under_attack) return rep;

    StageTwo s2;
    s2.alc.resize(kc);
    s2.cai.resize(kc);
    for (std::size_t k = 0; k < kc; ++k) {
        s2.alc[k] = combine_alert(rep.branches[k].alb, rep.branches[k].ale);
        s2.cai[k] = rep.branches[k].emldi * rep.branches[k].bori;
    }
    s2.cai_rank = rank_descending(s2.cai, snap.branch_ordinals);

    std::vector<std::size_t> order(kc);
    for (std::size_t k = 0; k < kc; ++k) order[s2.cai_rank[k] - 1] = k;
    for (auto k : order) {
        const bool danger = s2.alc[k] == AlertLevel::Danger;
        const bool top = s2.cai_rank[k] <= cfg.cai_top && s2.cai[k] > 0.0;
        if (danger || top) s2.suspects.push_back({k, snap.branch_ordinals[k], danger, top});
    }
    rep.stage2 = std::move(s2);
    return rep;
}

}  // namespace fdid
