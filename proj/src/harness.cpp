#include "fdid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "fdid/error.hpp"

namespace fdid {

namespace {

std::string percent_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", v * 100.0);
    return buf;
}

std::string distribution_label(double mu, double sigma) {
    return "N(" + (mu == 0.0 ? std::string("0") : percent_label(mu)) + "," + percent_label(sigma) + ")";
}

std::string study_key(const std::string& path, std::vector<std::size_t> outages) {
    std::sort(outages.begin(), outages.end());
    std::string key = path + "|";
    for (auto o : outages) key += std::to_string(o) + ",";
    return key;
}

}  // namespace

const char* to_string(ScenarioMode mode) {
    return mode == ScenarioMode::Attack ? "attack" : "fluctuation_only";
}

void ScenarioConfig::validate() const {
    if (case_path.empty()) throw ConfigError("scenario '" + id + "' has no case path");
    if (!(fluctuation.sigma >= 0.0) || !std::isfinite(fluctuation.mu)) {
        throw ConfigError("scenario '" + id + "' has an invalid fluctuation distribution");
    }
    if (!(noise_sigma >= 0.0)) throw ConfigError("scenario '" + id + "' has a negative noise sigma");
    if ((mode == ScenarioMode::Attack) != attack.has_value()) {
        throw ConfigError("scenario '" + id + "': attack parameters are required exactly in attack mode");
    }
    if (attack) {
        if (attack->target_branch == 0) throw ConfigError("scenario '" + id + "': branch ordinals start at 1");
        if (!(attack->load_shift > 0.0 && attack->load_shift <= 1.0)) {
            throw ConfigError("scenario '" + id + "': load shift must lie in (0, 1]");
        }
        if (!(attack->l1_limit >= 0.0)) throw ConfigError("scenario '" + id + "': l1 budget must be non-negative");
    }
    detector.validate();
}

std::shared_ptr<const StudyCase> StudyCase::load(const std::string& case_path, const std::vector<std::size_t>& outages) {
    return from_network(load_network(case_path, outages));
}

std::shared_ptr<const StudyCase> StudyCase::from_network(Network net) {
    auto study = std::make_shared<StudyCase>();
    study->ptdf = std::make_shared<const Ptdf>(compute_ptdf(net));
    study->net = std::move(net);
    return study;
}

std::uint64_t derive_seed(std::uint64_t suite_seed, std::uint64_t index) {
    std::uint64_t z = suite_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::VectorXd gen_fluctuation(const Network& net, const Eigen::VectorXd& loads_mw, double mu, double sigma,
                                std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ContractError("fluctuation sigma must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(loads_mw.size());
    for (const auto& bus : net.buses) {
        // One draw per bus keeps the stream aligned across load profiles.
        const double v = std::clamp(normal(rng), -kFluctuationCutoff, kFluctuationCutoff) * sigma + mu;
        if (bus.is_load_bus) {
            const auto n = static_cast<Eigen::Index>(bus.index);
            delta[n] = loads_mw[n] * v;
        }
    }
    return delta;
}

TimelineResult run_timeline(const StudyCase& study, const ScenarioConfig& config) {
    config.validate();
    const Network& net = study.net;
    const Ptdf& ptdf = *study.ptdf;
    const double base = net.base_mva;
    const auto nb = static_cast<Eigen::Index>(net.bus_count());

    TimelineResult out;

    // t = -dT: trusted state.
    const Eigen::VectorXd prev_loads = net.loads_mw();
    out.prev_dispatch = run_sced(net, ptdf, prev_loads);
    const Eigen::VectorXd prev_gen = generation_by_bus(net, out.prev_dispatch.gen_output_mw);

    // t = 0: loads move, the reference bus picks up the imbalance.
    out.true_loads = prev_loads + gen_fluctuation(net, prev_loads, config.fluctuation.mu, config.fluctuation.sigma,
                                                  config.fluctuation.seed);
    Eigen::VectorXd gen0 = prev_gen;
    gen0[static_cast<Eigen::Index>(net.reference_bus)] += out.true_loads.sum() - prev_gen.sum();
    out.physical_flows = ptdf.flows(net_injections_pu(net, gen0, out.true_loads));

    NoiseSpec noise;
    noise.flow_sigma = config.noise_sigma;
    noise.injection_sigma = config.noise_sigma;
    noise.seed = derive_seed(config.fluctuation.seed, 1);
    auto meas = build_measurements(net, out.physical_flows, out.true_loads / base, gen0 / base, noise);

    if (config.mode == ScenarioMode::Attack) {
        AttackSpec spec;
        spec.target = net.require_branch(config.attack->target_branch);
        spec.load_shift = config.attack->load_shift;
        spec.l1_limit = config.attack->l1_limit;
        spec.base_flows = out.physical_flows;
        spec.base_loads = out.true_loads;
        out.attack = solve_attack(net, spec);
        out.target = spec.target;
        meas = apply_attack(net, meas, *out.attack);
    }

    const auto se = wls_estimate(meas, net);
    out.residual_norm = se.weighted_residual_norm;
    out.lnr_value = se.lnr_value;
    out.bad_data = se.bad_data;

    Eigen::VectorXd measured_loads = Eigen::VectorXd::Zero(nb);
    for (const auto& bus : net.buses) {
        const auto n = static_cast<Eigen::Index>(bus.index);
        if (bus.is_load_bus) measured_loads[n] = gen0[n] - se.injections[n] * base;
    }

    // t = +dT: dispatch against what the operator sees, flows from what is real.
    out.next_dispatch = run_sced(net, ptdf, measured_loads);
    const Eigen::VectorXd next_gen = generation_by_bus(net, out.next_dispatch.gen_output_mw);
    Eigen::VectorXd next_gen_balanced = next_gen;
    next_gen_balanced[static_cast<Eigen::Index>(net.reference_bus)] += out.true_loads.sum() - next_gen.sum();
    out.next_flows = ptdf.flows(net_injections_pu(net, next_gen_balanced, out.true_loads));
    if (out.target) {
        const auto l = static_cast<Eigen::Index>(*out.target);
        out.target_overload_mw = std::abs(out.next_flows[l]) * base - net.branches[*out.target].limit_mw;
    }
    out.balance_error = std::max(std::abs(prev_gen.sum() - prev_loads.sum()),
                                 std::abs(next_gen.sum() - out.true_loads.sum())) / base;

    auto& snap = out.snapshot;
    snap.prev_flows = out.prev_dispatch.scheduled_flows;
    snap.prev_loads = prev_loads;
    snap.measured_flows = se.flows;
    snap.measured_loads = measured_loads;
    snap.sced_flows = out.next_dispatch.scheduled_flows;
    snap.limits = net.limits_pu();
    snap.branch_ordinals.reserve(net.branch_count());
    for (const auto& br : net.branches) snap.branch_ordinals.push_back(br.ordinal);
    snap.ptdf = study.ptdf;
    return out;
}

TimelineResult run_timeline(const ScenarioConfig& config) {
    const auto study = StudyCase::load(config.case_path, config.outages);
    return run_timeline(*study, config);
}

ScenarioOutcome evaluate_scenario(const StudyCase& study, const ScenarioConfig& config, bool keep_report) {
    ScenarioOutcome o;
    o.id = config.id;
    o.group = config.group;
    o.mode = config.mode;
    if (config.attack) o.target_ordinal = config.attack->target_branch;
    try {
        const auto tl = run_timeline(study, config);
        auto rep = run_two_stage(tl.snapshot, config.detector);
        o.smldi = rep.smldi;
        o.stage1_alert = rep.stage1_alert;
        o.under_attack = rep.under_attack;
        o.lnr_value = tl.lnr_value;
        o.bad_data = tl.bad_data;
        if (tl.attack) {
            const auto l = *tl.target;
            o.overload_mw = tl.target_overload_mw;
            o.tampered_loads = tl.attack->tampered_count();
            if (rep.stage2) {
                o.target_rank = rep.stage2->cai_rank[l];
                o.target_cai = rep.stage2->cai[l];
                for (const auto& s : rep.stage2->suspects) {
                    if (s.branch != l) continue;
                    o.identified = true;
                    o.target_top_cai = s.top_cai;
                    o.target_danger = s.danger;
                }
            }
        }
        if (keep_report) o.report = std::move(rep);
        o.ok = true;
    } catch (const Error& e) {
        o.error = e.what();
    }
    return o;
}

GroupStats summarize(const std::string& group, const std::vector<const ScenarioOutcome*>& members) {
    GroupStats g;
    g.group = group;
    g.scenarios = members.size();
    std::vector<double> values;
    std::size_t ranked = 0, attacks = 0;
    double rank_sum = 0.0, overload_sum = 0.0;
    for (const auto* o : members) {
        if (!o->ok) {
            ++g.failures;
            continue;
        }
        values.push_back(o->smldi);
        g.detected += o->under_attack ? 1 : 0;
        if (o->mode == ScenarioMode::Attack) {
            ++attacks;
            overload_sum += o->overload_mw;
            g.identified += o->identified ? 1 : 0;
            g.top_cai += o->target_top_cai ? 1 : 0;
            g.danger_marked += o->target_danger ? 1 : 0;
            if (o->target_rank > 0) {
                ++ranked;
                rank_sum += static_cast<double>(o->target_rank);
            }
        }
    }
    if (!values.empty()) {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        g.min = values.front();
        g.max = values.back();
        g.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        double sum = 0.0;
        for (double v : values) sum += v;
        g.average = sum / static_cast<double>(n);
        if (n > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - g.average) * (v - g.average);
            g.std = std::sqrt(ss / static_cast<double>(n - 1));
        }
    }
    if (ranked > 0) g.average_rank = rank_sum / static_cast<double>(ranked);
    if (attacks > 0) g.average_overload_mw = overload_sum / static_cast<double>(attacks);
    return g;
}

ExperimentReport run_experiment(const std::vector<ScenarioConfig>& suite, const RunOptions& options) {
    ExperimentReport rep;
    rep.outcomes.resize(suite.size());
    if (suite.empty()) return rep;

    // Studies are loaded up front so workers only read shared state.
    std::map<std::string, std::shared_ptr<const StudyCase>> studies;
    std::vector<std::shared_ptr<const StudyCase>> study_of(suite.size());
    std::vector<std::string> load_error(suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const auto key = study_key(suite[i].case_path, suite[i].outages);
        auto it = studies.find(key);
        if (it == studies.end()) {
            std::shared_ptr<const StudyCase> study;
            try {
                study = StudyCase::load(suite[i].case_path, suite[i].outages);
            } catch (const Error& e) {
                load_error[i] = e.what();
            }
            it = studies.emplace(key, study).first;
        }
        study_of[i] = it->second;
        if (!study_of[i] && load_error[i].empty()) load_error[i] = "case could not be loaded";
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < suite.size(); i = next++) {
            if (!study_of[i]) {
                auto& o = rep.outcomes[i];
                o.id = suite[i].id;
                o.group = suite[i].group;
                o.mode = suite[i].mode;
                o.error = load_error[i];
                continue;
            }
            rep.outcomes[i] = evaluate_scenario(*study_of[i], suite[i], options.keep_reports);
        }
    };
    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, suite.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<std::string> order;
    std::map<std::string, std::vector<const ScenarioOutcome*>> members;
    for (const auto& o : rep.outcomes) {
        if (!members.count(o.group)) order.push_back(o.group);
        members[o.group].push_back(&o);
    }
    for (const auto& g : order) rep.groups.push_back(summarize(g, members[g]));
    return rep;
}

namespace {

struct SuiteBuilder {
    std::string case_path;
    std::uint64_t seed;
    std::vector<std::size_t> outages;
    std::vector<ScenarioConfig> out;

    ScenarioConfig& add(std::string id, std::string group, double mu, double sigma) {
        ScenarioConfig c;
        c.id = std::move(id);
        c.group = std::move(group);
        c.case_path = case_path;
        c.outages = outages;
        c.fluctuation = {mu, sigma, derive_seed(seed, out.size())};
        out.push_back(std::move(c));
        return out.back();
    }

    void attacks(std::size_t target, const std::vector<double>& shifts, const std::vector<double>& budgets) {
        for (double sigma : {0.0, 0.03}) {
            const std::string load = sigma == 0.0 ? "constant" : distribution_label(0.0, sigma);
            const std::string group = "b" + std::to_string(target) + " " + load;
            for (double ls : shifts) {
                for (double n1 : budgets) {
                    char id[96];
                    std::snprintf(id, sizeof id, "b%zu-%s-ls%02d-n%02d", target, sigma == 0.0 ? "const" : "n0-3",
                                  static_cast<int>(std::lround(ls * 100)), static_cast<int>(std::lround(n1)));
                    auto& c = add(id, group, 0.0, sigma);
                    c.mode = ScenarioMode::Attack;
                    c.attack = AttackParams{target, ls, n1};
                }
            }
        }
    }

    void fluctuations(std::size_t per_group) {
        const std::pair<double, double> dists[] = {{0.0, 0.03}, {0.0, 0.05}, {-0.01, 0.03}, {0.01, 0.03}};
        for (const auto& [mu, sigma] : dists) {
            const std::string group = "fluct " + distribution_label(mu, sigma);
            for (std::size_t i = 0; i < per_group; ++i) {
                char id[96];
                std::snprintf(id, sizeof id, "fl-%+d-%d-%02zu", static_cast<int>(std::lround(mu * 100)),
                              static_cast<int>(std::lround(sigma * 100)), i + 1);
                add(id, group, mu, sigma);
            }
        }
    }
};

std::vector<double> budgets_1_to_10() {
    std::vector<double> v;
    for (int i = 1; i <= 10; ++i) v.push_back(i);
    return v;
}

}  // namespace

std::vector<ScenarioConfig> reference_suite_118(const std::string& case_path, std::uint64_t seed) {
    SuiteBuilder b{case_path, seed, {}, {}};
    for (std::size_t target : {118, 111}) b.attacks(target, {0.05, 0.10, 0.15, 0.20}, budgets_1_to_10());
    b.fluctuations(20);
    return std::move(b.out);
}

std::vector<ScenarioConfig> outage_suite_118(const std::string& case_path, std::size_t outage, std::uint64_t seed) {
    SuiteBuilder b{case_path, seed, {outage}, {}};
    for (std::size_t target : {118, 111}) b.attacks(target, {0.05, 0.10, 0.15, 0.20}, {5.0, 10.0});
    b.fluctuations(10);
    for (auto& c : b.out) {
        c.id = "o" + std::to_string(outage) + "-" + c.id;
        c.group = "outage " + std::to_string(outage) + " " + c.group;
    }
    return std::move(b.out);
}

std::vector<ScenarioConfig> reference_suite_rts96(const std::string& case_path, std::uint64_t seed) {
    SuiteBuilder b{case_path, seed, {}, {}};
    for (std::size_t target : {62, 99}) b.attacks(target, {0.10}, budgets_1_to_10());
    b.fluctuations(10);
    return std::move(b.out);
}

}  // namespace fdid
