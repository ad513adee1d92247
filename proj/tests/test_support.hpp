#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fdid/case_io.hpp"

namespace fdid::testing {

inline std::filesystem::path data_dir() { return FDID_DATA_DIR; }
inline std::filesystem::path case118_path() { return data_dir() / "case118_fdi.m"; }

// Triangle with x = 0.1 p.u. on every branch; bus 1 is the reference and the
// only generator. Branch order: 1-2, 1-3, 2-3.
inline const char* kTriangle = R"(function mpc = triangle
mpc.version = '2';
mpc.baseMVA = 100;
%% bus data
mpc.bus = [
	1	3	50	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	60	0	0	0	1	1	0	230	1	1.1	0.9;
	3	1	40	0	0	0	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	150	0	0	0	1	100	1	300	0;
];
mpc.branch = [
	1	2	0	0.1	0	100	0	0	0	0	1	-360	360;
	1	3	0	0.1	0	100	0	0	0	0	1	-360	360;
	2	3	0	0.1	0	100	0	0	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	2	10	0;
];
)";

inline Network triangle(std::vector<std::size_t> outages = {}) {
    std::istringstream in(kTriangle);
    return validate_case(parse_matpower(in), outages);
}

struct ToyBus {
    int id;
    int type;
    double load_mw;
};
struct ToyGen {
    int bus;
    double p_max;
    double cost;
    double p_min = 0.0;
};
struct ToyBranch {
    int from;
    int to;
    double x;
    double limit_mw;
};

// MATPOWER text for a small hand-built case.
inline std::string toy_case_text(const std::vector<ToyBus>& buses, const std::vector<ToyGen>& gens,
                                 const std::vector<ToyBranch>& branches) {
    std::ostringstream o;
    o << "function mpc = toy\nmpc.version = '2';\nmpc.baseMVA = 100;\nmpc.bus = [\n";
    for (const auto& b : buses) o << b.id << " " << b.type << " " << b.load_mw << " 0 0 0 1 1 0 230 1 1.1 0.9;\n";
    o << "];\nmpc.gen = [\n";
    for (const auto& g : gens) o << g.bus << " 0 0 0 0 1 100 1 " << g.p_max << " " << g.p_min << ";\n";
    o << "];\nmpc.branch = [\n";
    for (const auto& b : branches) o << b.from << " " << b.to << " 0 " << b.x << " 0 " << b.limit_mw << " 0 0 0 0 1 -360 360;\n";
    o << "];\nmpc.gencost = [\n";
    for (const auto& g : gens) o << "2 0 0 2 " << g.cost << " 0;\n";
    o << "];\n";
    return o.str();
}

inline Network toy_network(const std::vector<ToyBus>& buses, const std::vector<ToyGen>& gens,
                           const std::vector<ToyBranch>& branches, std::vector<std::size_t> outages = {}) {
    std::istringstream in(toy_case_text(buses, gens, branches));
    return validate_case(parse_matpower(in), outages);
}

inline Network case118(std::vector<std::size_t> outages = {}) { return load_network(case118_path(), outages); }

}  // namespace fdid::testing
