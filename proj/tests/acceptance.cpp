// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fdid/attack.hpp"
#include "fdid/detect.hpp"
#include "fdid/harness.hpp"
#include "fdid/powerflow.hpp"
#include "fdid/sced.hpp"
#include "fdid/state_estimation.hpp"
#include "lp_oracle.hpp"
#include "test_support.hpp"

using namespace fdid;
using namespace fdid::testing;

namespace {

constexpr double kPtdfTol = 1e-8;
constexpr double kFdStep = 1e-4;
constexpr double kUnobservableTol = 1e-8;
constexpr double kGrossError = 10.0;  // in meter standard deviations
constexpr double kAuditTol = 1e-7;
constexpr double kMonotoneTol = 1e-9;
constexpr double kOracleTol = 1e-6;
constexpr double kRangeTol = 1e-12;
constexpr double kSeparation = 0.35;
constexpr double kTamperTolMw = 1e-6;
constexpr std::uint64_t kSuiteSeed = 2017;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

const std::shared_ptr<const StudyCase>& study118() {
    static const auto s = StudyCase::load(case118_path().string(), {});
    return s;
}

// Stage-two quantities computed for every branch regardless of the stage-one
// gate, so undetected attacks still get a rank.
struct Ungated {
    std::vector<AlertLevel> alc;
    std::vector<std::size_t> rank;
};

Ungated ungated(const DetectionReport& rep) {
    Ungated u;
    std::vector<double> cai;
    std::vector<std::size_t> ordinals;
    for (const auto& b : rep.branches) {
        u.alc.push_back(combine_alert(b.alb, b.ale));
        cai.push_back(b.emldi * b.bori);
        ordinals.push_back(b.ordinal);
    }
    u.rank = rank_descending(cai, ordinals);
    return u;
}

double ptdf_fd_gap(const Network& net) {
    const DcPowerFlow pf(net);
    const auto ptdf = pf.ptdf();
    Eigen::VectorXd gen = Eigen::VectorXd::Zero(ix(net.bus_count()));
    for (const auto& g : net.generators) gen[ix(g.bus)] += net.total_load_mw() / static_cast<double>(net.generators.size());
    const Eigen::VectorXd inj = net_injections_pu(net, gen, net.loads_mw());
    const Eigen::VectorXd base = pf.solve(inj).flows;
    double worst = 0.0;
    for (std::size_t n = 0; n < net.bus_count(); ++n) {
        Eigen::VectorXd bumped = inj;
        bumped[ix(n)] += kFdStep;
        bumped[ix(net.reference_bus)] -= kFdStep;
        const Eigen::VectorXd fd = (pf.solve(bumped).flows - base) / kFdStep;
        worst = std::max(worst, (fd - ptdf.matrix.col(ix(n))).cwiseAbs().maxCoeff());
    }
    return worst;
}

Verdict ptdf_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto tri = triangle();
    const auto p = compute_ptdf(tri);
    const double hand = std::max({std::abs(p.matrix(0, 1) + 2.0 / 3.0), std::abs(p.matrix(1, 1) + 1.0 / 3.0),
                                  std::abs(p.matrix(2, 1) - 1.0 / 3.0), std::abs(p.matrix(0, 2) + 1.0 / 3.0),
                                  std::abs(p.matrix(1, 2) + 2.0 / 3.0), std::abs(p.matrix(2, 2) + 1.0 / 3.0)});
    const double gap = std::max(ptdf_fd_gap(tri), ptdf_fd_gap(study118()->net));
    const double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf, "hand gap %.2e, finite-difference gap %.2e, %.2f s", hand, gap, secs);
    return {hand < kPtdfTol && gap < kPtdfTol && secs < 5.0, buf};
}

// Everything an attack scenario needs besides its detection report.
struct AttackRun {
    ScenarioConfig cfg;
    TimelineResult tl;
};

std::vector<AttackRun> run_attacks(const std::vector<ScenarioConfig>& suite) {
    std::vector<AttackRun> runs;
    for (const auto& cfg : suite) {
        if (cfg.mode == ScenarioMode::Attack) runs.push_back({cfg, run_timeline(*study118(), cfg)});
    }
    return runs;
}

Verdict unobservability(const std::vector<AttackRun>& runs, double attack_secs) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& net = study118()->net;
    double worst_change = 0.0;
    std::size_t lnr_fired = 0, gross_missed = 0;
    const NoiseSpec noiseless;
    for (const auto& r : runs) {
        const auto& tl = r.tl;
        const Eigen::VectorXd gen_mw = generation_by_bus(net, tl.prev_dispatch.gen_output_mw);
        const Eigen::VectorXd inj = balance_at_reference(net, net_injections_pu(net, gen_mw, tl.true_loads));
        const Eigen::VectorXd loads = tl.true_loads / net.base_mva;
        const auto clean = build_measurements(net, tl.physical_flows, loads, inj + loads, noiseless);
        worst_change = std::max(worst_change, check_unobservability(net, *tl.attack, clean));
        auto tampered = apply_attack(net, clean, *tl.attack);
        if (wls_estimate(tampered, net).bad_data) ++lnr_fired;
        tampered.entries[*tl.target].value += kGrossError * noiseless.meter_sigma;
        if (!wls_estimate(tampered, net).bad_data) ++gross_missed;
    }
    const double secs = attack_secs + seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu attacks, max |dJ| %.2e, LNR fired on %zu, +10 sigma missed on %zu, %.1f s",
                  runs.size(), worst_change, lnr_fired, gross_missed, secs);
    return {!runs.empty() && worst_change < kUnobservableTol && lnr_fired == 0 && gross_missed == 0 && secs < 120.0,
            buf};
}

Verdict attack_audit(const std::vector<AttackRun>& runs) {
    const auto& net = study118()->net;
    double worst = 0.0;
    for (const auto& r : runs) {
        AttackSpec spec;
        spec.target = *r.tl.target;
        spec.load_shift = r.cfg.attack->load_shift;
        spec.l1_limit = r.cfg.attack->l1_limit;
        spec.base_flows = r.tl.physical_flows;
        spec.base_loads = r.tl.true_loads;
        worst = std::max(worst, audit_attack(net, spec, *r.tl.attack).worst());
    }

    const auto dispatch = run_sced(net, *study118()->ptdf, net.loads_mw());
    std::size_t violations = 0, solved = 0;
    const std::vector<double> shifts{0.05, 0.10, 0.15, 0.20};
    for (std::size_t target : {111, 118}) {
        std::vector<std::vector<double>> obj(shifts.size());
        for (std::size_t i = 0; i < shifts.size(); ++i) {
            for (int n1 = 1; n1 <= 10; ++n1) {
                AttackSpec spec;
                spec.target = net.require_branch(target);
                spec.load_shift = shifts[i];
                spec.l1_limit = n1;
                spec.base_flows = dispatch.scheduled_flows;
                spec.base_loads = net.loads_mw();
                const auto res = solve_attack(net, spec);
                worst = std::max(worst, audit_attack(net, spec, res).worst());
                obj[i].push_back(res.objective);
                ++solved;
            }
        }
        for (std::size_t i = 0; i < shifts.size(); ++i) {
            for (std::size_t j = 0; j < 10; ++j) {
                if (j > 0 && obj[i][j] < obj[i][j - 1] - kMonotoneTol) ++violations;
                if (i > 0 && obj[i][j] < obj[i - 1][j] - kMonotoneTol) ++violations;
            }
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu results audited, worst residual %.2e; %zu grid LPs, %zu monotonicity violations",
                  runs.size() + solved, worst, solved, violations);
    return {worst < kAuditTol && violations == 0, buf};
}

Verdict toy_oracle() {
    const auto net = triangle();
    const auto dispatch = run_sced(net, net.loads_mw());
    double worst = 0.0;
    std::size_t cases = 0, missing = 0;
    for (double ls : {0.05, 0.1, 0.5, 1.0}) {
        for (double n1 : {0.01, 0.05, 0.2, 1.0, 10.0}) {
            for (std::size_t target : {1, 2, 3}) {
                AttackSpec spec;
                spec.target = net.require_branch(target);
                spec.load_shift = ls;
                spec.l1_limit = n1;
                spec.base_flows = dispatch.scheduled_flows;
                spec.base_loads = net.loads_mw();
                const auto oracle = enumerate_vertices(build_attack_lp(net, spec));
                ++cases;
                if (!oracle) {
                    ++missing;
                    continue;
                }
                worst = std::max(worst, std::abs(solve_attack(net, spec).objective - *oracle));
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu triangle attacks, worst gap to vertex enumeration %.2e", cases, worst);
    return {missing == 0 && worst < kOracleTol, buf};
}

Snapshot quiet_snapshot() {
    const auto& s = *study118();
    const auto d = run_sced(s.net, *s.ptdf, s.net.loads_mw());
    Snapshot snap;
    snap.prev_flows = snap.measured_flows = snap.sced_flows = d.scheduled_flows;
    snap.prev_loads = snap.measured_loads = s.net.loads_mw();
    snap.limits = s.net.limits_pu();
    for (const auto& br : s.net.branches) snap.branch_ordinals.push_back(br.ordinal);
    snap.ptdf = s.ptdf;
    return snap;
}

Verdict metric_ranges() {
    const auto base = quiet_snapshot();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> spread(0.0, 0.3);
    std::size_t out_of_range = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto s = base;
        const double sd = spread(rng);
        for (auto& d : s.measured_loads) d *= 1.0 + sd * z(rng);
        for (Eigen::Index k = 0; k < s.limits.size(); ++k) {
            s.prev_flows[k] = s.limits[k] * z(rng);
            s.measured_flows[k] = s.limits[k] * z(rng);
            s.sced_flows[k] = s.limits[k] * z(rng);
        }
        const auto rep = run_two_stage(s);
        for (const auto& b : rep.branches) {
            if (std::abs(b.mldi) > 1.0 + kRangeTol || std::abs(b.emldi) > 1.0 + kRangeTol) ++out_of_range;
        }
        if (std::abs(rep.smldi) > 1.0 + kRangeTol) ++out_of_range;
    }

    std::size_t nonzero = 0;
    std::uniform_real_distribution<double> small(-0.0499, 0.0499);
    std::vector<std::function<double()>> shifts{[] { return 0.0499; }, [] { return -0.0499; }, [] { return 0.02; },
                                                [&] { return small(rng); }};
    for (const auto& shift : shifts) {
        for (int trial = 0; trial < 25; ++trial) {
            auto s = base;
            for (auto& d : s.measured_loads) d *= 1.0 + shift();
            const auto rep = run_two_stage(s);
            for (const auto& b : rep.branches) nonzero += (b.mldi != 0.0 || b.emldi != 0.0) ? 1 : 0;
            nonzero += rep.smldi != 0.0 ? 1 : 0;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "1000 random snapshots, %zu values out of range; 100 dead-band snapshots, %zu nonzero",
                  out_of_range, nonzero);
    return {out_of_range == 0 && nonzero == 0, buf};
}

Verdict combined_alert_table() {
    using A = AlertLevel;
    const A table[4][4] = {{A::Normal, A::Monitor, A::Monitor, A::Warning},
                           {A::Monitor, A::Monitor, A::Warning, A::Warning},
                           {A::Monitor, A::Warning, A::Warning, A::Danger},
                           {A::Warning, A::Warning, A::Danger, A::Danger}};
    const A levels[4] = {A::Normal, A::Monitor, A::Warning, A::Danger};
    int matched = 0;
    for (int b = 0; b < 4; ++b) {
        for (int e = 0; e < 4; ++e) matched += combine_alert(levels[b], levels[e]) == table[b][e] ? 1 : 0;
    }
    return {matched == 16, std::to_string(matched) + "/16 pairs match"};
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

Verdict separation(const ExperimentReport& rep, double secs) {
    std::size_t attacks = 0, attacks_above = 0, flucts = 0, flucts_below = 0, failed = 0;
    for (const auto& o : rep.outcomes) {
        if (!o.ok) {
            ++failed;
            continue;
        }
        if (o.mode == ScenarioMode::Attack) {
            ++attacks;
            attacks_above += o.smldi > kSeparation ? 1 : 0;
        } else {
            ++flucts;
            flucts_below += o.smldi < kSeparation ? 1 : 0;
        }
    }
    bool bands = true;
    std::string groups;
    for (const auto& g : rep.groups) {
        const bool attack_group = g.group.rfind("b1", 0) == 0;
        if (attack_group) bands = bands && g.average >= 0.55 && g.average <= 0.85;
        if (g.group == "fluct N(0,3%)") bands = bands && g.average >= 0.05 && g.average <= 0.20;
        groups += " " + g.group + "=" + pct(g.average);
    }
    const double a = attacks ? static_cast<double>(attacks_above) / static_cast<double>(attacks) : 0.0;
    const double f = flucts ? static_cast<double>(flucts_below) / static_cast<double>(flucts) : 0.0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "attacks above 35%%: %zu/%zu, fluctuations below: %zu/%zu, failed runs %zu, %.0f s;",
                  attacks_above, attacks, flucts_below, flucts, failed, secs);
    return {failed == 0 && attacks == 160 && flucts == 80 && a >= 0.95 && f >= 0.95 && bands && secs < 600.0,
            buf + groups};
}

Verdict identification(const ExperimentReport& rep) {
    std::size_t attacks = 0, identified = 0, gated = 0;
    double rank_sum = 0.0, gated_rank_sum = 0.0;
    for (const auto& o : rep.outcomes) {
        if (o.mode != ScenarioMode::Attack || !o.ok) continue;
        ++attacks;
        identified += o.identified ? 1 : 0;
        const auto u = ungated(*o.report);
        const auto pos = study118()->net.require_branch(*o.target_ordinal);
        rank_sum += static_cast<double>(u.rank[pos]);
        if (o.target_rank > 0) {
            ++gated;
            gated_rank_sum += static_cast<double>(o.target_rank);
        }
    }
    const double avg = attacks ? rank_sum / static_cast<double>(attacks) : 0.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "target among suspects %zu/%zu; average CAI rank %.2f over all attacks, %.2f over the %zu detected",
                  identified, attacks, avg, gated ? gated_rank_sum / static_cast<double>(gated) : 0.0, gated);
    return {attacks == 160 && static_cast<double>(identified) >= 0.9 * static_cast<double>(attacks) && avg <= 2.0, buf};
}

Verdict branch111_spot_check(const ExperimentReport& rep) {
    const auto pos = study118()->net.require_branch(111);
    std::size_t rank_one = 0, danger = 0, found = 0;
    std::string ranks;
    for (const auto& o : rep.outcomes) {
        if (o.group != "b111 constant" || !o.ok) continue;
        // The grid lists N1 = 1..10 for each load shift; keep L_S = 10%.
        if (o.id.find("-ls10-") == std::string::npos) continue;
        ++found;
        const auto u = ungated(*o.report);
        rank_one += u.rank[pos] == 1 ? 1 : 0;
        danger += u.alc[pos] == AlertLevel::Danger ? 1 : 0;
        ranks += (ranks.empty() ? "" : ",") + std::to_string(u.rank[pos]) + to_string(u.alc[pos])[0];
    }
    return {found == 10 && rank_one >= 8 && danger >= 7,
            "rank 1 for " + std::to_string(rank_one) + "/10, Danger for " + std::to_string(danger) +
                "/10 (N1=1..10: " + ranks + ")"};
}

Verdict tamper_and_overload(bool overload) {
    static const TimelineResult tl = [] {
        ScenarioConfig c;
        c.id = "b118";
        c.case_path = case118_path().string();
        c.mode = ScenarioMode::Attack;
        c.attack = AttackParams{118, 0.10, 5.0};
        return run_timeline(*study118(), c);
    }();
    if (overload) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "physical overload on branch 118 %.3f MW", tl.target_overload_mw);
        return {tl.target_overload_mw > 0.0, buf};
    }
    const auto changed = tl.attack->tampered_count(kTamperTolMw);
    return {changed >= 90 && study118()->net.load_bus_count() == 99,
            std::to_string(changed) + " of " + std::to_string(study118()->net.load_bus_count()) + " loads changed"};
}

Verdict robustness() {
    bool pass = true;
    std::string detail;
    for (std::size_t outage : {1, 71, 141}) {
        const auto rep = run_experiment(outage_suite_118(case118_path().string(), outage, kSuiteSeed));
        std::size_t attacks = 0, detected = 0, flucts = 0, alarms = 0, failed = 0;
        for (const auto& o : rep.outcomes) {
            if (!o.ok) {
                ++failed;
                continue;
            }
            if (o.mode == ScenarioMode::Attack) {
                ++attacks;
                detected += o.under_attack ? 1 : 0;
            } else {
                ++flucts;
                alarms += o.under_attack ? 1 : 0;
            }
        }
        pass = pass && failed == 0 && attacks == 32 && flucts == 40 && detected == attacks && alarms <= 2;
        char buf[120];
        std::snprintf(buf, sizeof buf, "%soutage %zu: detected %zu/%zu, false alarms %zu/%zu, failed %zu",
                      detail.empty() ? "" : "; ", outage, detected, attacks, alarms, flucts, failed);
        detail += buf;
    }
    return {pass, detail};
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const char* name, const Verdict& v) {
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    };

    report(1, "PTDF oracle", ptdf_oracle());

    const auto suite = reference_suite_118(case118_path().string(), kSuiteSeed);
    const auto t_attacks = std::chrono::steady_clock::now();
    const auto attacks = run_attacks(suite);
    report(2, "unobservability", unobservability(attacks, seconds_since(t_attacks)));
    report(3, "attack LP audit", attack_audit(attacks));
    report(4, "toy LP oracle", toy_oracle());
    report(5, "metric ranges and dead band", metric_ranges());
    report(6, "combined alert table", combined_alert_table());

    const auto t_suite = std::chrono::steady_clock::now();
    const auto experiment = run_experiment(suite);
    report(7, "SMLDI separation", separation(experiment, seconds_since(t_suite)));
    report(8, "stage-two identification", identification(experiment));
    report(9, "branch 111 spot check", branch111_spot_check(experiment));
    report(10, "tamper count", tamper_and_overload(false));
    report(11, "physical overload", tamper_and_overload(true));
    report(12, "outage robustness", robustness());

    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
