#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fdid/attack.hpp"
#include "fdid/error.hpp"
#include "fdid/harness.hpp"
#include "fdid/report_io.hpp"
#include "fdid/sced.hpp"

using namespace fdid;

namespace {

void emit(const Json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json_file(out, j);
    }
}

struct CaseArgs {
    std::string path;
    std::string outages;

    void add(CLI::App* app) {
        app->add_option("--case", path, "MATPOWER case file")->required()->check(CLI::ExistingFile);
        app->add_option("--outage", outages, "comma-separated branch ordinals to take out of service");
    }
    std::shared_ptr<const StudyCase> load() const { return StudyCase::load(path, parse_ordinal_list(outages)); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"False-data-injection attack synthesis and two-stage detection on DC networks"};
    app.require_subcommand(1);

    CaseArgs ptdf_case;
    std::string ptdf_out;
    double ptdf_threshold = 0.01;
    auto* ptdf_cmd = app.add_subcommand("ptdf", "dump the PTDF matrix and critical load bus sets");
    ptdf_case.add(ptdf_cmd);
    ptdf_cmd->add_option("--threshold", ptdf_threshold, "critical |PTDF| threshold")->capture_default_str();
    ptdf_cmd->add_option("--out", ptdf_out, "output JSON (stdout when omitted)");

    CaseArgs sced_case;
    std::string sced_loads, sced_out;
    bool sced_no_limits = false;
    auto* sced_cmd = app.add_subcommand("sced", "run the DC economic dispatch");
    sced_case.add(sced_cmd);
    sced_cmd->add_option("--loads", sced_loads, "JSON loads (MW); case loads when omitted")->check(CLI::ExistingFile);
    sced_cmd->add_flag("--no-limits", sced_no_limits, "ignore branch limits");
    sced_cmd->add_option("--out", sced_out, "output JSON");

    CaseArgs attack_case;
    std::string attack_loads, attack_out;
    std::size_t attack_target = 0;
    double attack_ls = 0.1, attack_n1 = 5.0;
    auto* attack_cmd = app.add_subcommand("attack", "solve the attack LP against the dispatched base state");
    attack_case.add(attack_cmd);
    attack_cmd->add_option("--target", attack_target, "target branch ordinal")->required();
    attack_cmd->add_option("--ls", attack_ls, "load shift factor (fraction)")->capture_default_str();
    attack_cmd->add_option("--n1", attack_n1, "l1 budget on the attack vector (rad)")->capture_default_str();
    attack_cmd->add_option("--loads", attack_loads, "JSON loads (MW); case loads when omitted")->check(CLI::ExistingFile);
    attack_cmd->add_option("--out", attack_out, "output JSON");

    std::string detect_snapshot, detect_out, detect_config;
    auto* detect_cmd = app.add_subcommand("detect", "run the two-stage detector on a snapshot");
    detect_cmd->add_option("--snapshot", detect_snapshot, "snapshot JSON")->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--config", detect_config, "detector settings JSON")->check(CLI::ExistingFile);
    detect_cmd->add_option("--out", detect_out, "output JSON");

    std::string timeline_scenario, timeline_out;
    auto* timeline_cmd = app.add_subcommand("timeline", "simulate one scenario and emit its snapshot and report");
    timeline_cmd->add_option("--scenario", timeline_scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    timeline_cmd->add_option("--out", timeline_out, "output JSON");

    std::string suite_path, suite_out;
    std::size_t threads = 0;
    auto* run_cmd = app.add_subcommand("run-experiment", "run a scenario suite");
    run_cmd->add_option("--suite", suite_path, "suite JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", suite_out, "output directory")->required();
    run_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::string gen_case = "data/case118_fdi.m", gen_out;
    bool gen_118 = false, gen_rts = false;
    std::size_t gen_outage = 0;
    std::uint64_t gen_seed = 2017;
    auto* gen_cmd = app.add_subcommand("gen-scenarios", "emit a default scenario grid as a suite JSON");
    auto* g118 = gen_cmd->add_flag("--paper-118", gen_118, "160 attacks and 80 fluctuations on the 118-bus case");
    auto* grts = gen_cmd->add_flag("--paper-rts96", gen_rts, "40 attacks and 40 fluctuations on an RTS-96 case");
    auto* gout = gen_cmd->add_option("--outage-118", gen_outage, "32 attacks and 40 fluctuations with one branch out");
    g118->excludes(grts)->excludes(gout);
    grts->excludes(gout);
    gen_cmd->add_option("--case", gen_case, "case path written into the suite")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "suite seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "output JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ptdf_cmd) {
            const auto study = ptdf_case.load();
            emit(to_json(study->net, compute_ptdf(study->net, ptdf_threshold)), ptdf_out);
        } else if (*sced_cmd) {
            const auto study = sced_case.load();
            const auto loads = sced_loads.empty() ? study->net.loads_mw() : loads_from_json(study->net, read_json_file(sced_loads));
            ScedOptions opts;
            opts.enforce_branch_limits = !sced_no_limits;
            emit(to_json(study->net, run_sced(study->net, *study->ptdf, loads, opts)), sced_out);
        } else if (*attack_cmd) {
            const auto study = attack_case.load();
            const auto& net = study->net;
            AttackSpec spec;
            spec.target = net.require_branch(attack_target);
            spec.load_shift = attack_ls;
            spec.l1_limit = attack_n1;
            spec.base_loads = attack_loads.empty() ? net.loads_mw() : loads_from_json(net, read_json_file(attack_loads));
            spec.base_flows = run_sced(net, *study->ptdf, spec.base_loads).scheduled_flows;
            const auto result = solve_attack(net, spec);
            Json j = to_json(net, spec, result);
            j["audit_worst"] = audit_attack(net, spec, result).worst();
            emit(j, attack_out);
        } else if (*detect_cmd) {
            const auto snap = snapshot_from_json(read_json_file(detect_snapshot), std::filesystem::path(detect_snapshot).parent_path());
            const auto cfg = detect_config.empty() ? DetectorConfig{} : detector_from_json(read_json_file(detect_config));
            emit(to_json(run_two_stage(snap, cfg)), detect_out);
        } else if (*timeline_cmd) {
            const auto cfg = scenario_from_json(read_json_file(timeline_scenario));
            const auto study = StudyCase::load(cfg.case_path, cfg.outages);
            const auto tl = run_timeline(*study, cfg);
            Json j = {{"scenario", to_json(cfg)},
                      {"snapshot", snapshot_to_json(tl.snapshot, cfg.case_path, cfg.outages)},
                      {"report", to_json(run_two_stage(tl.snapshot, cfg.detector))},
                      {"measurements", measurement_model_json()},
                      {"residual_norm", tl.residual_norm},
                      {"lnr", tl.lnr_value},
                      {"bad_data", tl.bad_data}};
            if (tl.target) {
                j["target_overload_mw"] = tl.target_overload_mw;
                j["tampered_loads"] = tl.attack->tampered_count();
            }
            emit(j, timeline_out);
        } else if (*run_cmd) {
            const auto suite = suite_from_json(read_json_file(suite_path));
            RunOptions opts;
            opts.threads = threads;
            const auto rep = run_experiment(suite, opts);
            write_experiment(rep, suite_out);
            std::cout << summary_csv(rep);
            std::size_t failed = 0;
            for (const auto& o : rep.outcomes) failed += o.ok ? 0 : 1;
            if (failed) std::cerr << failed << " scenario(s) failed; see " << suite_out << "/report.json\n";
        } else if (*gen_cmd) {
            std::vector<ScenarioConfig> suite;
            if (gen_rts) {
                suite = reference_suite_rts96(gen_case, gen_seed);
            } else if (gen_outage > 0) {
                suite = outage_suite_118(gen_case, gen_outage, gen_seed);
            } else if (gen_118) {
                suite = reference_suite_118(gen_case, gen_seed);
            } else {
                std::cerr << "choose --paper-118, --paper-rts96 or --outage-118\n";
                return 2;
            }
            emit(suite_to_json(suite, gen_seed), gen_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
