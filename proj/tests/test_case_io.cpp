#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fdid/case_io.hpp"
#include "fdid/error.hpp"
#include "test_support.hpp"

using namespace fdid;
using fdid::testing::kTriangle;

namespace {

RawCase parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_matpower(in);
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("118-bus case counts") {
    const auto raw = parse_matpower_file(fdid::testing::case118_path());
    CHECK(raw.bus_rows.size() == 118);
    CHECK(raw.branch_rows.size() == 186);
    std::size_t online = 0;
    for (const auto& g : raw.gen_rows) online += g[col::kGenStatus] > 0 ? 1 : 0;
    CHECK(online == 19);
    CHECK(raw.base_mva == 100.0);

    const auto net = validate_case(raw);
    CHECK(net.bus_count() == 118);
    CHECK(net.branch_count() == 186);
    CHECK(net.generators.size() == 19);
    CHECK(net.load_bus_count() == 99);
    CHECK(std::abs(net.total_load_mw() - 4242.0) <= 1.0);
    CHECK(net.buses[net.reference_bus].external_id == 69);
}

TEST_CASE("triangle counts") {
    const auto raw = parse_text(kTriangle);
    CHECK(raw.bus_rows.size() == 3);
    CHECK(raw.branch_rows.size() == 3);
    CHECK(raw.gen_rows.size() == 1);
    CHECK(raw.gencost_rows.size() == 1);
}

TEST_CASE("ragged row reports its line") {
    // The second branch row loses its last column; it sits on line 15.
    const auto text = replace_once(kTriangle, "1	3	0	0.1	0	100	0	0	0	0	1	-360	360;",
                                   "1	3	0	0.1	0	100	0	0	0	0	1	-360;");
    try {
        parse_text(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 15);
        CHECK(std::string(e.what()).find("15") != std::string::npos);
    }
}

TEST_CASE("unterminated block and missing blocks") {
    const auto cut = std::string(kTriangle).substr(0, std::string(kTriangle).find("];\nmpc.gencost"));
    CHECK_THROWS_AS(parse_text(cut), ParseError);

    const auto no_branch = replace_once(kTriangle, "mpc.branch", "mpc.lines");
    CHECK_THROWS_AS(parse_text(no_branch), StructuralError);
    const auto no_base = replace_once(kTriangle, "mpc.baseMVA = 100;", "");
    CHECK_THROWS_AS(parse_text(no_base), StructuralError);
}

TEST_CASE("comments, cell blocks and trailing columns are tolerated") {
    auto text = replace_once(kTriangle, "mpc.gencost", "mpc.bus_name = {\n\t'a';\n\t'b';\n};\n% trailing ] comment\nmpc.gencost");
    text = replace_once(text, "2	1	60	0	0	0	1	1	0	230	1	1.1	0.9;", "2	1	60	0	0	0	1	1	0	230	1	1.1	0.9 % bus two\n");
    auto raw = parse_text(text);
    CHECK(raw.bus_rows.size() == 3);
    CHECK(raw.bus_rows[1][col::kBusPd] == 60.0);
}

TEST_CASE("outages and connectivity") {
    const auto raw = parse_matpower_file(fdid::testing::case118_path());
    const auto one = validate_case(raw, {1});
    CHECK(one.branch_count() == 185);
    CHECK(one.outaged.size() == 1);
    CHECK(one.outaged[0].ordinal == 1);
    CHECK_FALSE(one.branch_position(1).has_value());
    CHECK(one.branch_position(2).value() == 0);
    CHECK_THROWS_AS(one.require_branch(1), StructuralError);

    CHECK(fdid::testing::triangle({1}).branch_count() == 2);
    CHECK_THROWS_AS(fdid::testing::triangle({1, 2}), IslandError);
    CHECK_THROWS_AS(fdid::testing::triangle({4}), StructuralError);
}

TEST_CASE("structural and data errors") {
    auto dup = replace_once(kTriangle, "3	1	40", "2	1	40");
    CHECK_THROWS_AS(validate_case(parse_text(dup)), StructuralError);

    auto zero_x = replace_once(kTriangle, "2	3	0	0.1", "2	3	0	0");
    CHECK_THROWS_AS(validate_case(parse_text(zero_x)), DataError);

    auto no_limit = replace_once(kTriangle, "2	3	0	0.1	0	100", "2	3	0	0.1	0	0");
    CHECK_THROWS_AS(validate_case(parse_text(no_limit)), DataError);

    auto off = replace_once(kTriangle, "2	3	0	0.1	0	100	0	0	0	0	1", "2	3	0	0	0	100	0	0	0	0	0");
    CHECK(validate_case(parse_text(off)).branch_count() == 2);
}

TEST_CASE("reference bus falls back to the lowest generator bus") {
    auto text = replace_once(kTriangle, "1	3	50", "1	2	50");
    text = replace_once(text, "\t1	150	0	0	0	1	100	1	300	0;", "\t3	75	0	0	0	1	100	1	300	0;\n\t2	75	0	0	0	1	100	1	300	0;");
    text = replace_once(text, "\t2	0	0	2	10	0;", "\t2	0	0	2	10	0;\n\t2	0	0	2	12	0;");
    const auto net = validate_case(parse_text(text));
    CHECK(net.buses[net.reference_bus].external_id == 2);
    CHECK(net.generators.size() == 2);
}

TEST_CASE("round trip is value identical") {
    const auto raw = parse_matpower_file(fdid::testing::case118_path());
    const auto again = parse_text(write_matpower(raw, "case118_fdi"));
    CHECK(again.base_mva == raw.base_mva);
    CHECK(again.bus_rows == raw.bus_rows);
    CHECK(again.branch_rows == raw.branch_rows);
    CHECK(again.gen_rows == raw.gen_rows);
    CHECK(again.gencost_rows == raw.gencost_rows);
}

TEST_CASE("validation is deterministic") {
    const auto a = fdid::testing::case118({71});
    const auto b = fdid::testing::case118({71});
    REQUIRE(a.bus_count() == b.bus_count());
    for (std::size_t i = 0; i < a.bus_count(); ++i) CHECK(a.buses[i].external_id == b.buses[i].external_id);
    for (std::size_t k = 0; k < a.branch_count(); ++k) {
        CHECK(a.branches[k].ordinal == b.branches[k].ordinal);
        CHECK(a.branches[k].from == b.branches[k].from);
    }
}

TEST_CASE("ordinal list parsing") {
    CHECK(parse_ordinal_list("1,71,141") == std::vector<std::size_t>{1, 71, 141});
    CHECK(parse_ordinal_list("") == std::vector<std::size_t>{});
    CHECK_THROWS_AS(parse_ordinal_list("1,x"), ConfigError);
    CHECK_THROWS_AS(parse_ordinal_list("0"), ConfigError);
}
