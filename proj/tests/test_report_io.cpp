#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fdid/error.hpp"
#include "fdid/report_io.hpp"
#include "test_support.hpp"

using namespace fdid;
using namespace fdid::testing;

TEST_CASE("scenario JSON round trip") {
    const auto suite = reference_suite_118(case118_path().string(), 9);
    const auto again = suite_from_json(suite_to_json(suite, 9));
    REQUIRE(again.size() == suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        CHECK(to_json(again[i]) == to_json(suite[i]));
    }
}

TEST_CASE("suite defaults and derived seeds") {
    const Json j = Json::parse(R"({
        "seed": 5,
        "defaults": {"case": "x.m", "fluctuation": {"sigma": 0.03}, "detector": {"top_n": 8}},
        "scenarios": [
            {"id": "a", "fluctuation": {"mu": 0.01}},
            {"mode": "attack", "attack": {"target_branch": 118, "load_shift": 0.2, "l1_limit": 3}},
            {"id": "c", "fluctuation": {"seed": 77}, "detector": {"mldi_thresholds": [0.6, 0.4, 0.2]}}
        ]})");
    const auto suite = suite_from_json(j);
    REQUIRE(suite.size() == 3);
    CHECK(suite[0].case_path == "x.m");
    CHECK(suite[0].fluctuation.mu == 0.01);
    CHECK(suite[0].fluctuation.sigma == 0.03);
    CHECK(suite[0].fluctuation.seed == derive_seed(5, 0));
    CHECK(suite[0].detector.top_n == 8);
    CHECK(suite[1].id == "s2");
    CHECK(suite[1].attack->target_branch == 118);
    CHECK(suite[1].attack->l1_limit == 3.0);
    CHECK(suite[2].fluctuation.seed == 77);
    CHECK(suite[2].detector.mldi.danger == 0.6);
    CHECK(suite[2].detector.top_n == 8);

    CHECK_THROWS_AS(suite_from_json(Json::parse(R"({"scenarios": [{"case": "x.m", "mode": "storm"}]})")), ConfigError);
    CHECK_THROWS_AS(suite_from_json(Json::parse(R"({"scenarios": [{"case": "x.m", "mode": "attack"}]})")), ConfigError);
    CHECK_THROWS_AS(suite_from_json(Json::parse(R"({"runs": []})")), ConfigError);
}

TEST_CASE("snapshot JSON reproduces the detection report") {
    ScenarioConfig c;
    c.id = "a";
    c.case_path = case118_path().string();
    c.mode = ScenarioMode::Attack;
    c.attack = AttackParams{118, 0.1, 5.0};
    const auto tl = run_timeline(c);
    const auto direct = run_two_stage(tl.snapshot);

    const auto tmp = std::filesystem::temp_directory_path() / "fdid_snapshot_test.json";
    write_json_file(tmp, snapshot_to_json(tl.snapshot, c.case_path, c.outages));
    const auto snap = snapshot_from_json(read_json_file(tmp));
    std::filesystem::remove(tmp);
    const auto again = run_two_stage(snap);
    CHECK(to_json(again) == to_json(direct));
}

TEST_CASE("load overrides") {
    const auto net = triangle();
    auto loads = loads_from_json(net, Json::parse(R"({"loads": {"2": 80}})"));
    CHECK(loads[0] == 50.0);
    CHECK(loads[1] == 80.0);
    loads = loads_from_json(net, Json::parse("[1, 2, 3]"));
    CHECK(loads[2] == 3.0);
    CHECK_THROWS_AS(loads_from_json(net, Json::parse(R"({"loads": {"9": 1}})")), ConfigError);
    CHECK_THROWS_AS(loads_from_json(net, Json::parse("[1, 2]")), ConfigError);
}

TEST_CASE("experiment output files") {
    ScenarioConfig c;
    c.id = "quiet/1";
    c.group = "quiet";
    c.case_path = case118_path().string();
    const auto rep = run_experiment({c});
    const auto dir = std::filesystem::temp_directory_path() / "fdid_experiment_test";
    std::filesystem::remove_all(dir);
    write_experiment(rep, dir);
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "scenarios" / "quiet_1.json"));
    const auto j = read_json_file(dir / "report.json");
    CHECK(j["groups"][0]["scenarios"] == 1);
    CHECK(j["measurements"]["lnr_threshold"] == 3.0);
    CHECK(read_json_file(dir / "scenarios" / "quiet_1.json")["measurements"]["meter_sigma"] == 0.01);
    CHECK(summary_csv(rep).rfind("group,scenarios,max,min,median,average,std,detected,identified,danger_marked", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("detector settings") {
    const auto cfg = detector_from_json(Json::parse(R"({"top_n": 12, "bori_thresholds": [1.2, 1.1, 1.0]})"));
    CHECK(cfg.top_n == 12);
    CHECK(cfg.bori.danger == 1.2);
    CHECK(cfg.mldi.danger == 0.5);
    CHECK_THROWS_AS(detector_from_json(Json::parse(R"({"mldi_thresholds": [0.1, 0.5, 0.2]})")), ConfigError);
    CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), ConfigError);
}
