#include "fdid/report_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdid/error.hpp"

namespace fdid {

namespace {

Json vec(const Eigen::VectorXd& v, double scale = 1.0) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i] * scale);
    return a;
}

Eigen::VectorXd vec_from(const Json& a, Eigen::Index expected, const char* name) {
    if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected) {
        throw ConfigError(std::string("'") + name + "' must be an array of " + std::to_string(expected) + " numbers");
    }
    Eigen::VectorXd v(expected);
    for (Eigen::Index i = 0; i < expected; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
    return v;
}

Json thresholds(const AlertThresholds& t) { return Json::array({t.danger, t.warning, t.monitor}); }

AlertThresholds thresholds_from(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("thresholds must be [danger, warning, monitor]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Recursive object merge; arrays and scalars in `over` replace those in `base`.
Json merged(Json base, const Json& over) {
    if (!base.is_object() || !over.is_object()) return over;
    for (auto it = over.begin(); it != over.end(); ++it) {
        base[it.key()] = base.contains(it.key()) ? merged(base[it.key()], it.value()) : it.value();
    }
    return base;
}

std::string safe_file_name(const std::string& id) {
    std::string out;
    for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    return out.empty() ? "scenario" : out;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
    return buf;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

Json to_json(const Network& net, const Ptdf& ptdf) {
    Json j;
    j["reference_bus"] = net.buses[ptdf.reference_bus].external_id;
    j["critical_threshold"] = ptdf.critical_threshold;
    Json buses = Json::array();
    for (const auto& b : net.buses) buses.push_back(b.external_id);
    j["bus_ids"] = buses;
    Json branches = Json::array();
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branches[k];
        Json crit = Json::array();
        for (auto n : ptdf.critical_sets[k]) crit.push_back(net.buses[n].external_id);
        branches.push_back({{"branch", br.ordinal},
                            {"from", net.buses[br.from].external_id},
                            {"to", net.buses[br.to].external_id},
                            {"critical_load_buses", crit},
                            {"ptdf", vec(ptdf.matrix.row(static_cast<Eigen::Index>(k)).transpose())}});
    }
    j["branches"] = branches;
    Json out = Json::array();
    for (const auto& br : net.outaged) out.push_back(br.ordinal);
    j["outaged_branches"] = out;
    return j;
}

Json to_json(const Network& net, const Dispatch& d) {
    Json gens = Json::array();
    for (std::size_t g = 0; g < d.gen_output_mw.size(); ++g) {
        gens.push_back({{"bus", net.buses[net.generators[g].bus].external_id}, {"output_mw", d.gen_output_mw[g]}});
    }
    Json flows = Json::array();
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        flows.push_back({{"branch", net.branches[k].ordinal},
                         {"flow_mw", d.scheduled_flows[static_cast<Eigen::Index>(k)] * net.base_mva},
                         {"limit_mw", net.branches[k].limit_mw}});
    }
    Json binding = Json::array();
    for (auto k : d.binding_branches) binding.push_back(net.branches[k].ordinal);
    return {{"total_cost", d.total_cost}, {"generators", gens}, {"binding_branches", binding}, {"flows", flows}};
}

Json to_json(const Network& net, const AttackSpec& spec, const AttackResult& r) {
    Json buses = Json::array();
    for (const auto& b : net.buses) {
        const auto n = static_cast<Eigen::Index>(b.index);
        buses.push_back({{"bus", b.external_id},
                         {"c", r.c[n]},
                         {"s", r.s[n]},
                         {"true_load_mw", spec.base_loads[n]},
                         {"delta_d_mw", r.delta_d[n]},
                         {"tampered_load_mw", r.tampered_loads[n]}});
    }
    Json branches = Json::array();
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        branches.push_back({{"branch", net.branches[k].ordinal},
                            {"true_flow_mw", spec.base_flows[i] * net.base_mva},
                            {"delta_p_mw", r.delta_p[i] * net.base_mva},
                            {"cyber_flow_mw", r.cyber_flows[i] * net.base_mva}});
    }
    return {{"target_branch", net.branches[spec.target].ordinal},
            {"load_shift", spec.load_shift},
            {"l1_limit", spec.l1_limit},
            {"objective_mw", r.objective * net.base_mva},
            {"tampered_loads", r.tampered_count()},
            {"lp_iterations", r.lp_iterations},
            {"buses", buses},
            {"branches", branches}};
}

Json to_json(const DetectionReport& rep) {
    Json branches = Json::array();
    for (std::size_t k = 0; k < rep.branches.size(); ++k) {
        const auto& b = rep.branches[k];
        Json row = {{"branch", b.ordinal}, {"critical_count", b.critical_count}, {"bori1", b.bori1}, {"bori2", b.bori2},
                    {"bori", b.bori},      {"alb", to_string(b.alb)},            {"mldi", b.mldi},   {"emldi", b.emldi},
                    {"ale", to_string(b.ale)}};
        if (rep.stage2) {
            row["alc"] = to_string(rep.stage2->alc[k]);
            row["cai"] = rep.stage2->cai[k];
            row["cai_rank"] = rep.stage2->cai_rank[k];
        }
        branches.push_back(row);
    }
    Json ka = Json::array();
    for (auto k : rep.ka) ka.push_back(rep.branches[k].ordinal);
    Json j = {{"smldi", rep.smldi},
              {"stage1_alert", to_string(rep.stage1_alert)},
              {"under_attack", rep.under_attack},
              {"reference_bus_index", rep.reference_bus},
              {"ka", ka}};
    if (rep.stage2) {
        Json suspects = Json::array();
        for (const auto& s : rep.stage2->suspects) {
            Json reasons = Json::array();
            if (s.danger) reasons.push_back("danger");
            if (s.top_cai) reasons.push_back("top_cai");
            suspects.push_back({{"branch", s.ordinal}, {"cai_rank", rep.stage2->cai_rank[s.branch]}, {"reasons", reasons}});
        }
        j["suspects"] = suspects;
    }
    j["branches"] = branches;
    return j;
}

Json to_json(const DetectorConfig& cfg) {
    return {{"bori_thresholds", thresholds(cfg.bori)},
            {"mldi_thresholds", thresholds(cfg.mldi)},
            {"dead_band", cfg.dead_band},
            {"dead_band_tolerance", cfg.dead_band_tolerance},
            {"top_n", cfg.top_n},
            {"min_critical", cfg.min_critical},
            {"cai_top", cfg.cai_top}};
}

DetectorConfig detector_from_json(const Json& j, DetectorConfig cfg) {
    if (j.is_null()) return cfg;
    if (!j.is_object()) throw ConfigError("detector settings must be an object");
    if (j.contains("bori_thresholds")) cfg.bori = thresholds_from(j["bori_thresholds"]);
    if (j.contains("mldi_thresholds")) cfg.mldi = thresholds_from(j["mldi_thresholds"]);
    cfg.dead_band = j.value("dead_band", cfg.dead_band);
    cfg.dead_band_tolerance = j.value("dead_band_tolerance", cfg.dead_band_tolerance);
    cfg.top_n = j.value("top_n", cfg.top_n);
    cfg.min_critical = j.value("min_critical", cfg.min_critical);
    cfg.cai_top = j.value("cai_top", cfg.cai_top);
    cfg.validate();
    return cfg;
}

Json to_json(const ScenarioConfig& c) {
    Json j = {{"id", c.id},
              {"group", c.group},
              {"case", c.case_path},
              {"outages", c.outages},
              {"mode", to_string(c.mode)},
              {"fluctuation", {{"mu", c.fluctuation.mu}, {"sigma", c.fluctuation.sigma}, {"seed", c.fluctuation.seed}}}};
    if (c.attack) {
        j["attack"] = {{"target_branch", c.attack->target_branch},
                       {"load_shift", c.attack->load_shift},
                       {"l1_limit", c.attack->l1_limit}};
    }
    j["noise_sigma"] = c.noise_sigma;
    j["detector"] = to_json(c.detector);
    return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("scenario must be an object");
    try {
        ScenarioConfig c;
        c.id = j.value("id", std::string());
        c.group = j.value("group", std::string("default"));
        c.case_path = j.value("case", std::string());
        if (j.contains("outages")) c.outages = j["outages"].get<std::vector<std::size_t>>();
        const auto mode = j.value("mode", std::string("fluctuation_only"));
        if (mode == "attack") {
            c.mode = ScenarioMode::Attack;
        } else if (mode != "fluctuation_only") {
            throw ConfigError("unknown scenario mode '" + mode + "'");
        }
        if (j.contains("fluctuation")) {
            const auto& f = j["fluctuation"];
            c.fluctuation.mu = f.value("mu", 0.0);
            c.fluctuation.sigma = f.value("sigma", 0.0);
            c.fluctuation.seed = f.value("seed", std::uint64_t{0});
        }
        if (j.contains("attack") && c.mode == ScenarioMode::Attack) {
            const auto& a = j["attack"];
            c.attack = AttackParams{a.at("target_branch").get<std::size_t>(), a.value("load_shift", 0.1), a.value("l1_limit", 5.0)};
        }
        c.noise_sigma = j.value("noise_sigma", 0.0);
        if (j.contains("detector")) c.detector = detector_from_json(j["detector"]);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario '" + j.value("id", std::string("?")) + "': " + e.what());
    }
}

std::vector<ScenarioConfig> suite_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("scenarios") || !j["scenarios"].is_array()) {
        throw ConfigError("suite must be an object with a 'scenarios' array");
    }
    const auto seed = j.value("seed", std::uint64_t{0});
    const Json defaults = j.value("defaults", Json::object());
    std::vector<ScenarioConfig> out;
    for (std::size_t i = 0; i < j["scenarios"].size(); ++i) {
        Json s = merged(defaults, j["scenarios"][i]);
        if (!s.contains("id")) s["id"] = "s" + std::to_string(i + 1);
        if (!s.contains("fluctuation")) s["fluctuation"] = Json::object();
        if (!s["fluctuation"].contains("seed")) s["fluctuation"]["seed"] = derive_seed(seed, i);
        out.push_back(scenario_from_json(s));
    }
    return out;
}

Json suite_to_json(const std::vector<ScenarioConfig>& suite, std::uint64_t seed) {
    Json scenarios = Json::array();
    for (const auto& c : suite) scenarios.push_back(to_json(c));
    return {{"seed", seed}, {"scenarios", scenarios}};
}

Json snapshot_to_json(const Snapshot& s, const std::string& case_path, const std::vector<std::size_t>& outages) {
    return {{"case", case_path},
            {"outages", outages},
            {"units", "flows p.u., loads MW"},
            {"prev_flows", vec(s.prev_flows)},
            {"prev_loads", vec(s.prev_loads)},
            {"measured_flows", vec(s.measured_flows)},
            {"measured_loads", vec(s.measured_loads)},
            {"sced_flows", vec(s.sced_flows)},
            {"limits", vec(s.limits)}};
}

Snapshot snapshot_from_json(const Json& j, const std::filesystem::path& relative_to) {
    if (!j.is_object() || !j.contains("case")) throw ConfigError("snapshot must name its case");
    std::filesystem::path path = j["case"].get<std::string>();
    if (path.is_relative() && !relative_to.empty() && !std::filesystem::exists(path)) path = relative_to / path;
    std::vector<std::size_t> outages;
    if (j.contains("outages")) outages = j["outages"].get<std::vector<std::size_t>>();
    const auto study = StudyCase::load(path.string(), outages);
    const auto& net = study->net;
    const auto k = static_cast<Eigen::Index>(net.branch_count());
    const auto n = static_cast<Eigen::Index>(net.bus_count());

    Snapshot s;
    s.prev_flows = vec_from(j.at("prev_flows"), k, "prev_flows");
    s.prev_loads = vec_from(j.at("prev_loads"), n, "prev_loads");
    s.measured_flows = vec_from(j.at("measured_flows"), k, "measured_flows");
    s.measured_loads = vec_from(j.at("measured_loads"), n, "measured_loads");
    s.sced_flows = vec_from(j.at("sced_flows"), k, "sced_flows");
    s.limits = j.contains("limits") ? vec_from(j["limits"], k, "limits") : net.limits_pu();
    for (const auto& br : net.branches) s.branch_ordinals.push_back(br.ordinal);
    s.ptdf = study->ptdf;
    s.validate();
    return s;
}

Eigen::VectorXd loads_from_json(const Network& net, const Json& j) {
    const Json& src = j.is_object() && j.contains("loads") ? j["loads"] : j;
    if (src.is_array()) return vec_from(src, static_cast<Eigen::Index>(net.bus_count()), "loads");
    if (!src.is_object()) throw ConfigError("loads must be an array or an object keyed by bus id");
    Eigen::VectorXd loads = net.loads_mw();
    for (auto it = src.begin(); it != src.end(); ++it) {
        int id = 0;
        try {
            id = std::stoi(it.key());
        } catch (const std::exception&) {
            throw ConfigError("bad bus id '" + it.key() + "'");
        }
        bool found = false;
        for (const auto& b : net.buses) {
            if (b.external_id != id) continue;
            loads[static_cast<Eigen::Index>(b.index)] = it.value().get<double>();
            found = true;
        }
        if (!found) throw ConfigError("unknown bus id " + it.key());
    }
    return loads;
}

Json measurement_model_json() {
    const NoiseSpec defaults;
    return {{"flows", "every in-service branch"},
            {"injections", "every bus"},
            {"meter_sigma", defaults.meter_sigma},
            {"lnr_threshold", kLnrThreshold}};
}

Json to_json(const ScenarioOutcome& o) {
    Json j = {{"id", o.id}, {"group", o.group}, {"mode", to_string(o.mode)}, {"ok", o.ok}};
    if (!o.ok) {
        j["error"] = o.error;
        return j;
    }
    j["smldi"] = o.smldi;
    j["stage1_alert"] = to_string(o.stage1_alert);
    j["under_attack"] = o.under_attack;
    j["lnr"] = o.lnr_value;
    j["bad_data"] = o.bad_data;
    j["measurements"] = measurement_model_json();
    if (o.target_ordinal) {
        j["target_branch"] = *o.target_ordinal;
        j["target_cai_rank"] = o.target_rank;
        j["target_cai"] = o.target_cai;
        j["identified"] = o.identified;
        j["target_danger"] = o.target_danger;
        j["overload_mw"] = o.overload_mw;
        j["tampered_loads"] = o.tampered_loads;
    }
    if (o.report) j["report"] = to_json(*o.report);
    return j;
}

Json to_json(const GroupStats& g) {
    return {{"group", g.group},         {"scenarios", g.scenarios},        {"failures", g.failures},
            {"smldi_max", g.max},       {"smldi_min", g.min},              {"smldi_median", g.median},
            {"smldi_average", g.average}, {"smldi_std", g.std},           {"detected", g.detected},
            {"identified", g.identified}, {"top_cai", g.top_cai},         {"danger_marked", g.danger_marked},
            {"average_rank", g.average_rank}, {"average_overload_mw", g.average_overload_mw}};
}

std::string summary_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "group,scenarios,max,min,median,average,std,detected,identified,danger_marked,average_rank,average_overload_mw,failures\n";
    for (const auto& g : report.groups) {
        char tail[96];
        std::snprintf(tail, sizeof tail, "%.3f,%.3f,%zu", g.average_rank, g.average_overload_mw, g.failures);
        out << '"' << g.group << "\"," << g.scenarios << ',' << pct(g.max) << ',' << pct(g.min) << ',' << pct(g.median) << ','
            << pct(g.average) << ',' << pct(g.std) << ',' << g.detected << ',' << g.identified << ',' << g.danger_marked << ','
            << tail << '\n';
    }
    return out.str();
}

void write_experiment(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "scenarios");
    Json groups = Json::array();
    for (const auto& g : report.groups) groups.push_back(to_json(g));
    Json summary = Json::array();
    for (const auto& o : report.outcomes) {
        Json row = to_json(o);
        row.erase("report");
        row.erase("measurements");
        summary.push_back(row);
        write_json_file(dir / "scenarios" / (safe_file_name(o.id) + ".json"), to_json(o));
    }
    write_json_file(dir / "report.json", Json{{"measurements", measurement_model_json()}, {"groups", groups}, {"scenarios", summary}});
    std::ofstream csv(dir / "summary.csv");
    if (!csv) throw ConfigError("cannot write " + (dir / "summary.csv").string());
    csv << summary_csv(report);
}

}  // namespace fdid
